"""Normal-mode decomposition of the Bopp-shifted two-dimensional oscillator.

The noncommutative oscillator is rewritten in commutative coordinates as a
quadratic form ``H`` over ``X = (x1, p1, x2, p2)`` plus a linear drive
``E . X``. ``Omega = J H`` has eigenvalues ``+-i lambda1, +-i lambda2``.
The eigenvectors are collected into ``Q`` so that ``X = Q A`` with
``A = (a1, a1^dag, a2, a2^dag)``.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConsistencyError, DegenerateModeError, DomainError
from .schedules import Constant, parse_schedule
from .symplectic import SIGMA_Y, SIGMA_Z, NCParams, standard_symplectic

CLAMP_TOL = 1e-10
DEGENERACY_TOL = 1e-8
VANISHING_TOL = 1e-12
DECOUPLED_TOL = 1e-14
INVERSE_TOL = 1e-8

#: how many times a factor of ``c`` was clamped from a small negative
clamp_counter: Counter = Counter()


def _as_schedule(value, name):
    return parse_schedule(value, name) if not callable(value) else value


@dataclass(frozen=True)
class OscillatorPoint:
    """All oscillator parameters frozen at one instant."""

    m1: float
    m2: float
    w1: float
    w2: float
    e1: float = 0.0
    e2: float = 0.0
    nc: NCParams = field(default_factory=NCParams)

    def __post_init__(self):
        for name in ("m1", "m2", "w1", "w2"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be positive and finite, got {val!r}")
        for name in ("e1", "e2"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def hbar(self):
        return self.nc.hbar


@dataclass(frozen=True)
class OscillatorConfig:
    """Time-dependent oscillator: every field except ``hbar`` is a schedule ``t -> float``."""

    m1: Callable = Constant(1.0)
    m2: Callable = Constant(1.0)
    w1: Callable = Constant(1.0)
    w2: Callable = Constant(1.0)
    e1: Callable = Constant(0.0)
    e2: Callable = Constant(0.0)
    theta: Callable = Constant(0.0)
    eta: Callable = Constant(0.0)
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m1", "m2", "w1", "w2", "e1", "e2", "theta", "eta"):
            object.__setattr__(self, name, _as_schedule(getattr(self, name), name))
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise DomainError("hbar must be positive")

    def at(self, t: float) -> OscillatorPoint:
        nc = NCParams(self.theta(t), self.eta(t), self.hbar)
        return OscillatorPoint(self.m1(t), self.m2(t), self.w1(t), self.w2(t),
                               self.e1(t), self.e2(t), nc)


@dataclass(frozen=True)
class DerivedParams:
    mu1: float
    mu2: float
    alpha1: float
    alpha2: float
    nu1: float
    nu2: float
    w_eff1: float
    w_eff2: float
    b: float
    c: float
    delta: float
    nc: NCParams = field(default_factory=NCParams)

    @property
    def hbar(self):
        return self.nc.hbar

    @property
    def w1_sq(self):
        return self.alpha1 / self.mu1

    @property
    def w2_sq(self):
        return self.alpha2 / self.mu2


def _clamp(name, value, scale):
    if value >= 0:
        return value
    if value >= -CLAMP_TOL * scale:
        clamp_counter[name] += 1
        warnings.warn(f"{name} = {value:.3e} clamped to 0", RuntimeWarning, stacklevel=3)
        return 0.0
    raise ConsistencyError(f"{name} = {value:.6e} is negative beyond numerical slack")


def derived_params(cfg, t: float | None = None) -> DerivedParams:
    """Effective masses, spring constants and couplings at one instant.

    ``cfg`` is an :class:`OscillatorConfig` (with ``t``) or an
    :class:`OscillatorPoint`.

    The quartic ``lambda^4 + b lambda^2 + c`` is the characteristic
    polynomial of ``Omega``. ``c = f1 f2`` is evaluated in factored form with
    ``f1 = alpha1/mu2 - 4 nu2^2`` and ``f2 = alpha2/mu1 - 4 nu1^2``, both
    non-negative. With ``s = mu1 nu1 + mu2 nu2`` the discriminant is::

        delta = (mu2/mu1 f1 - mu1/mu2 f2)^2 + 8 s^2 (f1/mu1^2 + f2/mu2^2) + 16 s^4 / (mu1 mu2)^2
    """
    if isinstance(cfg, OscillatorConfig):
        if t is None:
            raise TypeError("a time is required when passing an OscillatorConfig")
        point = cfg.at(t)
    else:
        point = cfg
    th, et, hb = point.nc.theta, point.nc.eta, point.nc.hbar
    m1, m2, w1, w2 = point.m1, point.m2, point.w1, point.w2
    mu1 = 1.0 / (1.0 / m1 + th * th / (4 * hb * hb) * m2 * w2 * w2)
    mu2 = 1.0 / (1.0 / m2 + th * th / (4 * hb * hb) * m1 * w1 * w1)
    alpha1 = m1 * w1 * w1 + et * et / (4 * hb * hb * m2)
    alpha2 = m2 * w2 * w2 + et * et / (4 * hb * hb * m1)
    nu1 = (et + m1 * m2 * th * w2 * w2) / (4 * hb * m1)
    nu2 = (et + m1 * m2 * th * w1 * w1) / (4 * hb * m2)
    W1, W2 = alpha1 / mu1, alpha2 / mu2
    b = W1 + W2 + 8 * nu1 * nu2
    scale = max(1.0, b * b)
    f1 = _clamp("c", alpha1 / mu2 - 4 * nu2 * nu2, scale)
    f2 = _clamp("c", alpha2 / mu1 - 4 * nu1 * nu1, scale)
    c = f1 * f2
    # b^2 - 4c as a sum of non-negative terms; the direct difference loses
    # half the digits when the two frequencies nearly coincide
    s = mu1 * nu1 + mu2 * nu2
    delta = ((mu2 / mu1 * f1 - mu1 / mu2 * f2) ** 2
             + 8 * s * s * (f1 / (mu1 * mu1) + f2 / (mu2 * mu2))
             + 16 * s ** 4 / (mu1 * mu2) ** 2)
    return DerivedParams(mu1, mu2, alpha1, alpha2, nu1, nu2, math.sqrt(W1), math.sqrt(W2),
                         b, c, delta, point.nc)


class AppendixDiagnostics(NamedTuple):
    wx_sq: float
    wy_sq: float
    alpha0: float
    b: float
    c: float
    delta: float
    ratio1: float
    ratio2: float


def appendix_diagnostics(dp: DerivedParams) -> AppendixDiagnostics:
    """Independent route to ``b``, ``c`` and the discriminant.

    With ``r1 = mu1 W1 / (4 mu2 nu2^2)``, ``r2 = mu2 W2 / (4 mu1 nu1^2)``,
    ``wx^2 = 4 nu1 nu2 (r1 - 1)``, ``wy^2 = 4 nu1 nu2 (r2 - 1)`` and
    ``alpha0 = mu2 nu2 / (mu1 nu1)``::

        c = wx^2 wy^2
        b = alpha0 wx^2 + wy^2 / alpha0 + 4 nu1 nu2 (sqrt(alpha0) + 1/sqrt(alpha0))^2
        delta = (alpha0 wx^2 - wy^2/alpha0)^2
                + 8 nu1 nu2 (1 + alpha0)^2 (wx^2 + wy^2 / alpha0^2)
                + 16 nu1^2 nu2^2 (1 + alpha0)^4 / alpha0^2

    The ratios ``r1, r2`` are bounded below by 1. Requires ``nu1 * nu2 > 0``.
    """
    if not dp.nu1 * dp.nu2 > 0:
        raise DomainError("appendix diagnostics need nu1 * nu2 > 0")
    n12 = dp.nu1 * dp.nu2
    r1 = dp.mu1 * dp.w1_sq / (4 * dp.mu2 * dp.nu2 ** 2)
    r2 = dp.mu2 * dp.w2_sq / (4 * dp.mu1 * dp.nu1 ** 2)
    wx_sq, wy_sq = 4 * n12 * (r1 - 1), 4 * n12 * (r2 - 1)
    a0 = dp.mu2 * dp.nu2 / (dp.mu1 * dp.nu1)
    b = a0 * wx_sq + wy_sq / a0 + 4 * n12 * (math.sqrt(a0) + 1 / math.sqrt(a0)) ** 2
    c = wx_sq * wy_sq
    delta = ((a0 * wx_sq - wy_sq / a0) ** 2
             + 8 * n12 * (1 + a0) ** 2 * (wx_sq + wy_sq / a0 ** 2)
             + 16 * n12 ** 2 * (1 + a0) ** 4 / a0 ** 2)
    return AppendixDiagnostics(wx_sq, wy_sq, a0, b, c, delta, r1, r2)


def build_hamiltonian(dp: DerivedParams, drives=(0.0, 0.0), nc: NCParams | None = None):
    """Quadratic form ``H`` and drive vector ``E`` over ``(x1, p1, x2, p2)``.

    ``H_c = X^T H X / 2 + E . X``.
    """
    nc = dp.nc if nc is None else nc
    e1, e2 = drives
    H = np.array([
        [dp.alpha1, 0.0, 0.0, -2 * dp.nu2],
        [0.0, 1.0 / dp.mu1, 2 * dp.nu1, 0.0],
        [0.0, 2 * dp.nu1, dp.alpha2, 0.0],
        [-2 * dp.nu2, 0.0, 0.0, 1.0 / dp.mu2],
    ])
    a = nc.theta / (2 * nc.hbar)
    E = np.array([e1, a * e2, e2, -a * e1], dtype=float)
    return H, E


def build_omega(H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if np.max(np.abs(H - H.T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise DomainError("H must be symmetric")
    return standard_symplectic() @ H


def normal_frequencies(dp: DerivedParams) -> tuple[float, float]:
    """``(lambda1, lambda2)`` with ``lambda1 >= lambda2 >= 0`` and ``lambda1 * lambda2 = sqrt(c)``."""
    l1 = math.sqrt(0.5 * (dp.b + math.sqrt(dp.delta)))
    l2 = math.sqrt(dp.c) / l1 if l1 > 0 else 0.0
    return l1, l2


def paper_gammas(dp: DerivedParams, lam: float) -> np.ndarray:
    """The four closed-form left-eigenvector coefficients for frequency ``lam``.

    ``u = (-i g1, g2, g3, i g4)`` satisfies ``u Omega = -i lam u`` whenever
    ``lam`` is a root of the characteristic polynomial. No normalization.
    """
    mu1, mu2, nu1, nu2 = dp.mu1, dp.mu2, dp.nu1, dp.nu2
    W2 = dp.w2_sq
    l2 = lam * lam
    # d = lam^2 - W2 solves d^2 + (W2 - W1) d - r = 0 with r a sum of O(nu^2)
    # terms; solving it stably avoids the cancellation in lam^2 - W2 when
    # the coupling is weak
    r = (8 * nu1 * nu2 * l2 + 4 * nu1 * nu1 * dp.alpha1 / mu2 + 4 * nu2 * nu2 * dp.alpha2 / mu1
         - 16 * nu1 * nu1 * nu2 * nu2)
    gap = W2 - dp.w1_sq
    root = math.sqrt(max(gap * gap + 4 * r, 0.0))
    big = -0.5 * (gap + math.copysign(root, gap))
    roots = (big, -r / big) if big != 0 else (0.0, 0.0)
    d2 = min(roots, key=lambda x: abs(x - (l2 - W2)))
    return np.array([
        lam * mu1 * mu2 * (d2 - 4 * nu1 * nu2),
        mu2 * d2 + 4 * mu1 * nu1 * nu1,
        2 * mu1 * mu2 * nu1 * (l2 - 4 * nu1 * nu2) + 2 * nu2 * mu2 * mu2 * W2,
        2 * lam * (mu1 * nu1 + mu2 * nu2),
    ])


def _symplectic_norm(gamma, hbar):
    s = gamma[0] * gamma[1] + gamma[2] * gamma[3]
    if not s > 0:
        raise DegenerateModeError(f"eigenvector has non-positive symplectic norm {s:.3e}")
    return math.sqrt(2 * hbar * s)


def eigenvector_gammas(dp: DerivedParams, lam: float):
    """Closed-form coefficients for one mode and their normalization constant.

    Returns ``(gamma, k)`` with the sign of ``gamma`` fixed so that
    ``gamma[1] >= 0`` and ``k`` making ``Q^-1 J Q^-T = Sigma_y / hbar``.
    """
    l1, l2 = normal_frequencies(dp)
    if abs(l1 - l2) < DEGENERACY_TOL * l1:
        raise DegenerateModeError("degenerate spectrum; use the decoupled-mode fallback")
    gamma = paper_gammas(dp, lam)
    if np.all(np.abs(gamma) < VANISHING_TOL):
        raise DegenerateModeError("eigenvector coefficients vanish; use the decoupled-mode fallback")
    if gamma[1] < 0:
        gamma = -gamma
    return gamma, _symplectic_norm(gamma, dp.hbar)


def _decoupled_gammas(dp: DerivedParams):
    """Per-oscillator ladder coefficients, highest frequency first."""
    modes = [
        (dp.w_eff1, np.array([dp.w_eff1 * dp.mu1, 1.0, 0.0, 0.0])),
        (dp.w_eff2, np.array([0.0, 0.0, dp.w_eff2 * dp.mu2, 1.0])),
    ]
    modes.sort(key=lambda m: -m[0])
    lams = (modes[0][0], modes[1][0])
    gammas = [m[1] for m in modes]
    ks = [_symplectic_norm(g, dp.hbar) for g in gammas]
    return lams, gammas, ks


def _left_vector(gamma, k):
    return np.array([-1j * gamma[0], gamma[1], gamma[2], 1j * gamma[3]]) / k


@dataclass(frozen=True)
class NormalModeDecomposition:
    lambda1: float
    lambda2: float
    gamma: np.ndarray
    k1: float
    k2: float
    Q: np.ndarray
    Qinv: np.ndarray
    method: str = "closed_form"
    hbar: float = 1.0

    @property
    def lambdas(self):
        return np.array([self.lambda1, self.lambda2])

    @property
    def scaled_gamma(self) -> np.ndarray:
        """``hbar * gamma / k`` per row: the real coefficients of the columns of ``Q``."""
        return self.hbar * self.gamma / np.array([[self.k1], [self.k2]])

    def residuals(self, omega) -> dict:
        """The three defining identities as max-abs residuals."""
        d = np.diag([-1j * self.lambda1, 1j * self.lambda1, -1j * self.lambda2, 1j * self.lambda2])
        J = standard_symplectic()
        return {
            "diagonalization": float(np.max(np.abs(self.Qinv @ omega @ self.Q - d))),
            "adjoint": float(np.max(np.abs(self.Q.conj().T + self.hbar * SIGMA_Z @ self.Qinv @ SIGMA_Y))),
            "symplectic": float(np.max(np.abs(self.Qinv @ J @ self.Qinv.T - SIGMA_Y / self.hbar))),
            "inverse": float(np.max(np.abs(self.Qinv @ self.Q - np.eye(4)))),
        }


def _assemble(lams, gammas, ks, hbar, method):
    us = [_left_vector(g, k) for g, k in zip(gammas, ks)]
    qinv = np.vstack([us[0], us[0].conj(), us[1], us[1].conj()])
    vs = [-hbar * SIGMA_Y @ u.conj() for u in us]
    q = np.column_stack([vs[0], vs[0].conj(), vs[1], vs[1].conj()])
    return NormalModeDecomposition(lams[0], lams[1], np.vstack(gammas), ks[0], ks[1], q, qinv,
                                   method, hbar)


def build_Q(dp: DerivedParams) -> NormalModeDecomposition:
    """Symplectically normalized eigenvector matrix.

    Uses the closed-form coefficients; falls back to decoupled per-oscillator
    ladders when the coupling is negligible and the closed forms break down.
    """
    weak = dp.nu1 * dp.nu2 < DECOUPLED_TOL
    if dp.nu1 == 0 and dp.nu2 == 0:
        return _assemble(*_decoupled_gammas(dp), dp.hbar, "decoupled")
    lams = normal_frequencies(dp)
    try:
        pairs = [eigenvector_gammas(dp, lam) for lam in lams]
    except DegenerateModeError:
        if weak:
            return _assemble(*_decoupled_gammas(dp), dp.hbar, "decoupled")
        raise
    dec = _assemble(lams, [p[0] for p in pairs], [p[1] for p in pairs], dp.hbar, "closed_form")
    # near-degenerate pairs can pass the gap test yet collapse onto one eigenvector
    if np.max(np.abs(dec.Qinv @ dec.Q - np.eye(4))) > INVERSE_TOL:
        if weak:
            return _assemble(*_decoupled_gammas(dp), dp.hbar, "decoupled")
        raise DegenerateModeError("closed-form eigenvectors are not independent")
    return dec


class DriveTerms(NamedTuple):
    f1: complex
    f2: complex
    g: float


def drive_terms(dp: DerivedParams, decomposition: NormalModeDecomposition, drives,
                nc: NCParams | None = None) -> DriveTerms:
    """Linear couplings ``f_j`` of the drive to each mode and the zero-point shift ``g``.

    ``f_j = (hbar/k_j)[E2 (g4 + a g1) - i E1 (g2 + a g3)]`` with
    ``a = theta / (2 hbar)``, i.e. ``E . conj(v_j)`` for the ``j``-th column of ``Q``.
    """
    nc = dp.nc if nc is None else nc
    e1, e2 = drives
    a = nc.theta / (2 * nc.hbar)
    fs = []
    for gamma, k in zip(decomposition.gamma, (decomposition.k1, decomposition.k2)):
        g1, g2, g3, g4 = gamma
        fs.append(nc.hbar / k * complex(e2 * (g4 + a * g1), -e1 * (g2 + a * g3)))
    return DriveTerms(fs[0], fs[1], 0.5 * (decomposition.lambda1 + decomposition.lambda2))
