"""Displacement parameters of the invariant's eigenstates and their phases.

Each normal mode ``j`` carries a complex displacement obeying

    i hbar beta_j' = lambda_j(t) beta_j + 2 f_j(t),

solved here by an adaptive Runge-Kutta integrator and, independently, by
quadrature of its variation-of-constants solution.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from .canonical import OscillatorConfig, build_Q, derived_params, drive_terms
from .errors import DomainError, IntegrationError
from .rk import dopri45

TOL_RANGE = (1e-12, 1e-4)


class ModeSample(NamedTuple):
    lam: np.ndarray
    f: np.ndarray


@dataclass(frozen=True)
class ConstantModes:
    """Time-independent frequencies and drive couplings."""

    lam1: float
    lam2: float
    f1: complex = 0j
    f2: complex = 0j
    hbar: float = 1.0

    def __call__(self, t: float) -> ModeSample:
        return ModeSample(np.array([self.lam1, self.lam2]), np.array([self.f1, self.f2], dtype=complex))


@functools.lru_cache(maxsize=4096)
def _oscillator_sample(cfg: OscillatorConfig, t: float):
    dp = derived_params(cfg, t)
    dec = build_Q(dp)
    point = cfg.at(t)
    dt = drive_terms(dp, dec, (point.e1, point.e2))
    return (dec.lambda1, dec.lambda2), (dt.f1, dt.f2)


@dataclass(frozen=True)
class OscillatorModes:
    """Normal frequencies and drive couplings of an oscillator config, evaluated on demand."""

    cfg: OscillatorConfig

    @property
    def hbar(self):
        return self.cfg.hbar

    def __call__(self, t: float) -> ModeSample:
        lam, f = _oscillator_sample(self.cfg, float(t))
        return ModeSample(np.array(lam), np.array(f, dtype=complex))


def _hbar(modes) -> float:
    return float(getattr(modes, "hbar", 1.0))


@dataclass(frozen=True)
class BetaTrajectory:
    """Samples of ``beta_j``, their derivatives and ``Omega_j = int lambda_j``.

    Array fields have one row per time and one column per mode.
    """

    times: np.ndarray
    beta: np.ndarray
    beta_dot: np.ndarray
    omega_accum: np.ndarray
    lam: np.ndarray
    f: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        for name in ("beta", "beta_dot", "omega_accum", "lam", "f"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                raise IntegrationError(f"non-finite samples in {name}")
            arr.setflags(write=False)
        self.times.setflags(write=False)

    @property
    def beta1(self):
        return self.beta[:, 0]

    @property
    def beta2(self):
        return self.beta[:, 1]

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Cubic Hermite interpolation of ``(beta, beta_dot)`` at ``t``."""
        if not self.times[0] <= t <= self.times[-1]:
            raise DomainError(f"t={t} outside the trajectory window")
        spline = CubicHermiteSpline(self.times, self.beta, self.beta_dot, axis=0)
        return spline(t), spline(t, 1)

    def constraint_terms(self) -> np.ndarray:
        """Per-sample sum over modes of ``lam|b|^2 + 2 Re(f b*) + hbar Im(b' b*)``."""
        b = self.beta
        terms = (self.lam * np.abs(b) ** 2 + 2 * np.real(self.f * b.conj())
                 + self.hbar * np.imag(self.beta_dot * b.conj()))
        return terms.sum(axis=1)


def _check_tol(tol):
    lo, hi = TOL_RANGE
    if not lo <= tol <= hi:
        raise DomainError(f"tol must lie in [{lo:g}, {hi:g}], got {tol:g}")


def integrate_beta(modes: Callable, beta0=(0j, 0j), t_span=(0.0, 1.0), tol: float = 1e-10,
                   t_eval=None, n_points: int = 201, max_steps: int = 1_000_000) -> BetaTrajectory:
    """Integrate both displacement equations and sample on a grid.

    Parameters
    ----------
    modes : callable
        ``t -> ModeSample``; optional ``hbar`` attribute (default 1).
    beta0 : pair of complex
        Initial displacements.
    t_span : (float, float)
    tol : float
        Relative and absolute tolerance, within ``[1e-12, 1e-4]``.
    t_eval : array_like, optional
        Output grid; defaults to ``n_points`` evenly spaced times over ``t_span``.
    max_steps : int
        Step budget passed to the integrator.

    Raises
    ------
    IntegrationError
        On step-size underflow or an exhausted step budget, with the last
        time reached.
    """
    _check_tol(tol)
    hbar = _hbar(modes)
    t0, t1 = (float(x) for x in t_span)
    if not t1 > t0:
        raise DomainError("t_span must be increasing")
    grid = np.linspace(t0, t1, n_points) if t_eval is None else np.asarray(t_eval, dtype=float)
    if grid[0] != t0 or grid[-1] > t1 or np.any(np.diff(grid) <= 0):
        raise DomainError("t_eval must start at t_span[0], stay inside t_span and increase")

    def rhs(t, y):
        lam, f = modes(t)
        out = np.empty(4, dtype=complex)
        out[:2] = -1j * (lam * y[:2] + 2 * f) / hbar
        out[2:] = lam
        return out

    y0 = np.array([complex(beta0[0]), complex(beta0[1]), 0j, 0j])
    ys, dys = dopri45(rhs, y0, grid, rtol=tol, atol=tol, max_steps=max_steps)
    samples = [modes(t) for t in grid]
    lam = np.array([s.lam for s in samples], dtype=float)
    f = np.array([s.f for s in samples], dtype=complex)
    return BetaTrajectory(grid, ys[:, :2], dys[:, :2], ys[:, 2:].real, lam, f, hbar)


class _OmegaTable:
    """``Omega_j(t) = int_0^t lambda_j`` by quad from the nearest lower anchor."""

    def __init__(self, modes, t_end, step, epsabs, epsrel):
        self.modes, self.step = modes, step
        self.kw = dict(epsabs=epsabs, epsrel=epsrel, limit=200)
        n = max(1, int(math.ceil(t_end / step)))
        self.anchors = np.zeros((n + 1, 2))
        for k in range(n):
            self.anchors[k + 1] = self.anchors[k] + self._segment(k * step, (k + 1) * step)

    def _segment(self, a, b):
        if b <= a:
            return np.zeros(2)
        return np.array([integrate.quad(lambda s, j=j: self.modes(s).lam[j], a, b, **self.kw)[0]
                         for j in range(2)])

    def __call__(self, t):
        k = min(int(t // self.step), len(self.anchors) - 1)
        return self.anchors[k] + self._segment(k * self.step, t)


def beta_quadrature(modes: Callable, beta0, t: float, epsabs: float = 1e-13,
                    epsrel: float = 1e-12, chunk: float = 0.5) -> np.ndarray:
    """Closed-form displacement at ``t`` by adaptive quadrature.

    ``beta_j = exp(-i W_j/hbar) [beta_j0 - (2i/hbar) int_0^t f_j exp(i W_j/hbar)]``
    with ``W_j = int_0^t lambda_j``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    hbar = _hbar(modes)
    omega = _OmegaTable(modes, t, chunk, epsabs, epsrel)
    edges = np.linspace(0.0, t, max(1, int(math.ceil(t / chunk))) + 1)
    out = np.empty(2, dtype=complex)
    w_end = omega(t)
    for j in range(2):
        def integrand(s, j=j):
            return modes(s).f[j] * np.exp(1j * omega(s)[j] / hbar)

        acc = 0j
        for a, b in zip(edges[:-1], edges[1:]):
            val, err = integrate.quad(integrand, a, b, complex_func=True,
                                      epsabs=epsabs, epsrel=epsrel, limit=200)
            acc += val
        out[j] = np.exp(-1j * w_end[j] / hbar) * (complex(beta0[j]) - 2j / hbar * acc)
    return out


def constraint_residual(traj: BetaTrajectory, modes: Callable | None = None) -> float:
    """Largest violation of the invariant's eigenvalue constraint over the grid.

    When ``modes`` is given the frequencies and couplings are re-evaluated
    instead of taken from the stored samples.
    """
    if modes is not None:
        samples = [modes(t) for t in traj.times]
        traj = BetaTrajectory(traj.times, traj.beta.copy(), traj.beta_dot.copy(), traj.omega_accum.copy(),
                              np.array([s.lam for s in samples]), np.array([s.f for s in samples]),
                              traj.hbar)
    return float(np.max(np.abs(traj.constraint_terms())))


def _window(traj: BetaTrajectory, t):
    """Samples on ``[t0, t]``; appends an interpolated endpoint when ``t`` is off-grid."""
    if t is None or t == traj.times[-1]:
        return traj.times, traj.beta, traj.beta_dot, traj.lam, traj.f
    if not traj.times[0] <= t <= traj.times[-1]:
        raise DomainError(f"t={t} outside the trajectory window")
    k = int(np.searchsorted(traj.times, t, side="right"))
    times, beta, bdot = traj.times[:k], traj.beta[:k], traj.beta_dot[:k]
    lam, f = traj.lam[:k], traj.f[:k]
    if times[-1] < t:
        b, bd = traj.at(t)
        lam_t = np.array([np.interp(t, traj.times, traj.lam[:, j]) for j in range(2)])
        f_t = np.array([np.interp(t, traj.times, traj.f[:, j].real)
                        + 1j * np.interp(t, traj.times, traj.f[:, j].imag) for j in range(2)])
        times = np.append(times, t)
        beta, bdot = np.vstack([beta, b]), np.vstack([bdot, bd])
        lam, f = np.vstack([lam, lam_t]), np.vstack([f, f_t])
    return times, beta, bdot, lam, f


def _simpson(y, x):
    if len(x) < 2:
        return 0.0
    return float(integrate.simpson(y, x=x))


def geometric_phase(traj: BetaTrajectory, t: float | None = None) -> float:
    """``-sum_j int Im(beta_j' conj(beta_j))`` up to ``t`` (default: end of trajectory)."""
    times, beta, bdot, _, _ = _window(traj, t)
    integrand = np.imag(bdot * beta.conj()).sum(axis=1)
    return -_simpson(integrand, times)


def dynamic_phase(traj: BetaTrajectory, n1: int = 0, n2: int = 0, t: float | None = None) -> float:
    """``-(1/hbar) int [g + sum_k (lam_k n_k + lam_k |beta_k|^2 + 2 Re(f_k conj(beta_k)))]``."""
    for n in (n1, n2):
        if int(n) != n or n < 0:
            raise DomainError("occupation numbers must be non-negative integers")
    times, beta, _, lam, f = _window(traj, t)
    occ = np.array([n1, n2], dtype=float)
    integrand = (0.5 * lam.sum(axis=1)
                 + (lam * (occ + np.abs(beta) ** 2) + 2 * np.real(f * beta.conj())).sum(axis=1))
    return -_simpson(integrand, times) / traj.hbar


@dataclass(frozen=True)
class PhaseRecord:
    n1: int
    n2: int
    phi_geometric: float
    phi_dynamic: float
    phi_total: float
    l1: int = 0
    l2: int = 0


def phase_record(traj: BetaTrajectory, n1: int = 0, n2: int = 0, t: float | None = None) -> PhaseRecord:
    g = geometric_phase(traj, t)
    d = dynamic_phase(traj, n1, n2, t)
    return PhaseRecord(int(n1), int(n2), g, d, g + d)


TRAJECTORY_COLUMNS = ("t", "re_beta1", "im_beta1", "re_beta2", "im_beta2", "omega1", "omega2",
                      "constraint_residual")


def write_trajectory_csv(traj: BetaTrajectory, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    resid = traj.constraint_terms()
    for i, t in enumerate(traj.times):
        b1, b2 = traj.beta[i]
        row = (t, b1.real, b1.imag, b2.real, b2.imag, *traj.omega_accum[i], resid[i])
        w.writerow([f"{float(x):.17g}" for x in row])
