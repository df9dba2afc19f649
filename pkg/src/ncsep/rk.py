"""Adaptive Dormand-Prince 5(4) integrator for small complex ODE systems.

Steps land exactly on every requested output time, so samples there carry
the full local accuracy and no interpolation error.
"""

from __future__ import annotations

import numpy as np

from .errors import IntegrationError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def _step(fun, t, y, f0, h):
    k = [f0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(fun(t + _C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B, k) if b)
    err = h * sum(e * kj for e, kj in zip(_E, k))
    # FSAL: the last stage is f(t + h, y_new)
    return y_new, k[6], err


def dopri45(fun, y0, t_eval, rtol=1e-10, atol=1e-10, h0=None, max_steps=1_000_000):
    """Integrate ``y' = fun(t, y)`` from ``t_eval[0]`` and sample at every ``t_eval``.

    Returns ``(ys, dys)`` with one row per output time.

    Raises
    ------
    IntegrationError
        On step-size underflow or when ``max_steps`` is exceeded.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=complex)
    n = len(t_eval)
    ys = np.empty((n, y.size), dtype=complex)
    dys = np.empty_like(ys)
    if n == 0:
        return ys, dys
    t = float(t_eval[0])
    f = fun(t, y)
    ys[0], dys[0] = y, f
    span = float(t_eval[-1] - t)
    h = h0 if h0 is not None else min(max(span, 1.0) * 1e-3, 1e-2)
    steps = 0
    for i in range(1, n):
        target = float(t_eval[i])
        while t < target:
            remaining = target - t
            last = h >= remaining
            h_try = remaining if last else h
            if h_try <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
                raise IntegrationError("step size underflow", last_time=t)
            y_new, f_new, err = _step(fun, t, y, f, h_try)
            # non-finite stages are handled below by shrinking the step
            with np.errstate(invalid="ignore", over="ignore"):
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                e = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))
            steps += 1
            if steps > max_steps:
                raise IntegrationError("maximum number of steps exceeded", last_time=t)
            if not np.isfinite(e):
                h = 0.25 * h_try
                continue
            if e <= 1.0:
                t = target if last else t + h_try
                y, f = y_new, f_new
                factor = MAX_FACTOR if e == 0 else min(MAX_FACTOR, SAFETY * e ** -0.2)
                # a truncated final step says nothing about the natural step size
                if not last or factor < 1.0:
                    h = h_try * factor
            else:
                h = h_try * max(MIN_FACTOR, SAFETY * e ** -0.2)
        ys[i], dys[i] = y, f
    return ys, dys
