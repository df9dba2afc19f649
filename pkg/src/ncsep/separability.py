"""Covariance-matrix bookkeeping and Simon's separability test for two modes.

Covariances are 4x4 real symmetric matrices over ``(x1, p1, x2, p2)``; the
first mode owns the upper-left 2x2 block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .symplectic import J2, NCParams, bopp_shift, bopp_shift_inverse, standard_symplectic

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
PS_TOL = 1e-10


class Frame(str, Enum):
    COMMUTATIVE = "commutative"
    NONCOMMUTATIVE = "noncommutative"


class Verdict(str, Enum):
    SEPARABLE = "separable"
    ENTANGLED = "entangled"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class CovarianceMatrix:
    """Second-moment matrix tagged with the frame its coordinates live in."""

    entries: np.ndarray
    frame: Frame = Frame.COMMUTATIVE

    def __post_init__(self):
        v = np.array(self.entries, dtype=float)
        if v.shape != (4, 4):
            raise ValidationError(f"covariance must be 4x4, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("covariance has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.max(np.abs(v - v.T)) > SYMMETRY_TOL * scale:
            raise ValidationError("covariance is not symmetric")
        v = 0.5 * (v + v.T)
        v.setflags(write=False)
        object.__setattr__(self, "entries", v)
        object.__setattr__(self, "frame", Frame(self.frame))

    @property
    def v11(self):
        return self.entries[:2, :2]

    @property
    def v12(self):
        return self.entries[:2, 2:]

    @property
    def v22(self):
        return self.entries[2:, 2:]

    def require(self, frame: Frame):
        if self.frame is not Frame(frame):
            raise ValidationError(f"expected a {Frame(frame).value} covariance, got {self.frame.value}")
        return self


def as_covariance(v, frame=Frame.COMMUTATIVE) -> CovarianceMatrix:
    if isinstance(v, CovarianceMatrix):
        return v
    return CovarianceMatrix(np.asarray(v, dtype=float), frame)


class LocalInvariants(NamedTuple):
    delta1: float
    delta2: float
    delta12: float
    delta_v: float
    tau_v: float


def _det2(m) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def local_invariants(v) -> LocalInvariants:
    """Block determinants, full determinant and the trace invariant.

    All five are unchanged by local ``Sp(2,R) x Sp(2,R)`` congruences.
    """
    cov = as_covariance(v).require(Frame.COMMUTATIVE)
    a, c, b = cov.v11, cov.v12, cov.v22
    tau = float(np.trace(a @ J2 @ c @ J2 @ b @ J2 @ c.T @ J2))
    return LocalInvariants(_det2(a), _det2(b), _det2(c), float(np.linalg.det(cov.entries)), tau)


class RSUPResult(NamedTuple):
    holds: bool
    min_eigenvalue: float
    scalar_slack: float
    scalar_holds: bool


def rsup_check(v, hbar: float = 1.0, tol: float = PSD_TOL) -> RSUPResult:
    """Robertson-Schroedinger test ``V + (i/2) hbar J >= 0``.

    ``holds`` comes from the Hermitian eigenvalue test. ``scalar_holds`` is
    the same statement through local invariants only: the slack
    ``d1*d2 + (hbar^2/4 - d12)^2 - tau - hbar^2/4 (d1 + d2)`` equals
    ``det(V + i hbar J / 2) = (n+^2 - hbar^2/4)(n-^2 - hbar^2/4)`` in terms of
    the symplectic eigenvalues, so it must be paired with
    ``d1 + d2 + 2 d12 = n+^2 + n-^2 >= hbar^2 / 2`` to exclude both lying
    below ``hbar/2``. For positive-definite ``V`` the two answers coincide.
    """
    cov = as_covariance(v).require(Frame.COMMUTATIVE)
    herm = cov.entries + 0.5j * hbar * standard_symplectic()
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    d1, d2, d12, _, tau = local_invariants(cov)
    q = hbar * hbar / 4.0
    slack = math.fsum((d1 * d2, (q - d12) ** 2, -tau, -q * (d1 + d2)))
    scale = max(1.0, d1 * d2, q * q)
    seralian = d1 + d2 + 2 * d12
    scalar_ok = slack >= -tol * scale and seralian >= 2 * q - tol * max(1.0, abs(seralian))
    return RSUPResult(min_eig >= -tol, min_eig, slack, scalar_ok)


def _ps_terms(inv: LocalInvariants, hbar: float):
    q = hbar * hbar / 4.0
    return (inv.delta1 * inv.delta2, (q - abs(inv.delta12)) ** 2, -inv.tau_v, -q * (inv.delta1 + inv.delta2))


def simon_ps(v, hbar: float = 1.0) -> float:
    """Simon's functional; ``>= 0`` for every separable state, and sufficient for Gaussian ones."""
    return math.fsum(_ps_terms(local_invariants(v), hbar))


def mirror_reflection(v) -> CovarianceMatrix:
    """Partial transpose on mode 2: ``p2 -> -p2``."""
    cov = as_covariance(v).require(Frame.COMMUTATIVE)
    s = np.diag([1.0, 1.0, 1.0, -1.0])
    return CovarianceMatrix(s @ cov.entries @ s, Frame.COMMUTATIVE)


def symplectic_eigenvalues(v) -> tuple[float, float]:
    """Local symplectic eigenvalues ``sqrt(det V_jj)`` of the two diagonal blocks."""
    cov = as_covariance(v).require(Frame.COMMUTATIVE)
    out = []
    for block in (cov.v11, cov.v22):
        d = _det2(block)
        if d < 0:
            raise ValidationError(f"block determinant {d:.3e} < 0: not a physical covariance")
        out.append(math.sqrt(d))
    return out[0], out[1]


class WilliamsonDiagnostic(NamedTuple):
    d1: float
    d2: float
    kappa1: float
    kappa2: float


def williamson_normal_form(v) -> WilliamsonDiagnostic:
    """Normal-form parameters ``(sqrt(D1), sqrt(D2), k1, k2)``.

    Solves ``D12 = k1*k2`` and ``det V = (sqrt(D1 D2) - k1^2)(sqrt(D1 D2) - k2^2)``
    with ``|k1| >= |k2|``. The transform itself is not built.
    """
    inv = local_invariants(v)
    d1, d2 = symplectic_eigenvalues(v)
    s = d1 * d2
    p = inv.delta12
    if s == 0.0:
        return WilliamsonDiagnostic(d1, d2, 0.0, 0.0)
    ksum = (s * s + p * p - inv.delta_v) / s
    disc = max(ksum * ksum - 4.0 * p * p, 0.0)
    k1sq = max(0.5 * (ksum + math.sqrt(disc)), 0.0)
    k1 = math.sqrt(k1sq)
    k2 = p / k1 if k1 > 0 else 0.0
    return WilliamsonDiagnostic(d1, d2, k1, k2)


@dataclass(frozen=True)
class SeparabilityReport:
    delta1: float
    delta2: float
    delta12: float
    delta_v: float
    tau_v: float
    ps: float
    rsup_ok: bool
    verdict: Verdict
    gaussian: bool = True

    def to_dict(self) -> dict:
        return {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta12": self.delta12,
            "delta_v": self.delta_v,
            "tau_v": self.tau_v,
            "ps": self.ps,
            "rsup_ok": self.rsup_ok,
            "verdict": self.verdict.value,
        }


def classify_ps(ps: float, scale: float = 1.0, tol: float = PS_TOL) -> Verdict:
    if abs(ps) < tol * max(1.0, scale):
        return Verdict.MARGINAL
    return Verdict.SEPARABLE if ps > 0 else Verdict.ENTANGLED


def separability_report(v, hbar: float = 1.0, *, gaussian: bool = True,
                        ps_tol: float = PS_TOL, psd_tol: float = PSD_TOL) -> SeparabilityReport:
    inv = local_invariants(v)
    terms = _ps_terms(inv, hbar)
    ps = math.fsum(terms)
    verdict = classify_ps(ps, max(abs(t) for t in terms), ps_tol)
    rsup = rsup_check(v, hbar, psd_tol)
    return SeparabilityReport(*inv, ps=ps, rsup_ok=rsup.holds, verdict=verdict, gaussian=gaussian)


def nc_to_commutative(v_nc, nc: NCParams, method: str = "blocks") -> CovarianceMatrix:
    """Map an NC-frame covariance to commutative coordinates.

    ``method="blocks"`` uses the entrywise block formulas, ``"conjugation"``
    computes ``U^-1 V (U^-1)^T``. Both give the same matrix.
    """
    cov = as_covariance(v_nc, Frame.NONCOMMUTATIVE).require(Frame.NONCOMMUTATIVE)
    if method == "conjugation":
        ui = bopp_shift_inverse(nc)
        return CovarianceMatrix(ui @ cov.entries @ ui.T, Frame.COMMUTATIVE)
    if method != "blocks":
        raise ValueError(f"unknown method {method!r}")

    w = cov.entries
    th, et, hb = nc.theta, nc.eta, nc.hbar
    a, e = th / (2 * hb), et / (2 * hb)
    # 1-based accessor keeps the formulas readable
    def t(i, j):
        return w[i - 1, j - 1]

    v = np.empty((4, 4))
    v[0, 0] = t(1, 1) + 2 * a * t(1, 4) + a * a * t(4, 4)
    v[0, 1] = t(1, 2) + a * t(2, 4) - e * t(1, 3) - a * e * t(3, 4)
    v[1, 1] = t(2, 2) - 2 * e * t(2, 3) + e * e * t(3, 3)
    v[2, 2] = t(3, 3) - 2 * a * t(2, 3) + a * a * t(2, 2)
    v[2, 3] = t(3, 4) - a * t(2, 4) + e * t(1, 3) - a * e * t(1, 2)
    v[3, 3] = t(4, 4) + 2 * e * t(1, 4) + e * e * t(1, 1)
    v[0, 2] = t(1, 3) - a * (t(1, 2) - t(3, 4)) - a * a * t(2, 4)
    v[0, 3] = t(1, 4) + a * t(4, 4) + e * t(1, 1) + a * e * t(1, 4)
    v[1, 2] = t(2, 3) - a * t(2, 2) - e * t(3, 3) + a * e * t(2, 3)
    v[1, 3] = t(2, 4) - e * (t(3, 4) - t(1, 2)) - e * e * t(1, 3)
    for i, j in ((0, 1), (2, 3), (0, 2), (0, 3), (1, 2), (1, 3)):
        v[j, i] = v[i, j]
    return CovarianceMatrix(v / nc.schur_det, Frame.COMMUTATIVE)


def commutative_to_nc(v, nc: NCParams) -> CovarianceMatrix:
    cov = as_covariance(v).require(Frame.COMMUTATIVE)
    u = bopp_shift(nc)
    return CovarianceMatrix(u @ cov.entries @ u.T, Frame.NONCOMMUTATIVE)
