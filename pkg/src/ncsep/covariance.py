"""Second moments of displaced number states of the two normal modes.

The moments are built from the eigenvector coefficients (``gamma``) of the
normal-mode decomposition. The number-state occupation enters with weight
``2 n_j + 1``. The displacements never reach the covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import DerivedParams, build_Q, normal_frequencies, paper_gammas
from .errors import ConsistencyError, DomainError
from .separability import CovarianceMatrix, Frame, as_covariance
from .symplectic import NCParams, bopp_shift

IMAG_TOL = 1e-12

CONVENTIONS = ("physical", "paper")


@dataclass(frozen=True)
class QuadraticMoments:
    """The ten real numbers fixing the Hermitian moment matrix.

    Diagonal and ``q14``/``q23`` are real entries; ``q12, q13, q24, q34`` are
    the imaginary parts of the remaining (purely imaginary) entries.
    """

    q11: float
    q12: float
    q13: float
    q14: float
    q22: float
    q23: float
    q24: float
    q33: float
    q34: float
    q44: float
    n1: int = 0
    n2: int = 0

    @property
    def gaussian(self) -> bool:
        return self.n1 == 0 and self.n2 == 0

    def matrix(self) -> np.ndarray:
        """Hermitian 4x4 with real part the covariance and imaginary part the commutator."""
        m = np.array([
            [self.q11, 1j * self.q12, 1j * self.q13, self.q14],
            [0, self.q22, self.q23, 1j * self.q24],
            [0, 0, self.q33, 1j * self.q34],
            [0, 0, 0, self.q44],
        ], dtype=complex)
        return np.triu(m) + np.triu(m, 1).conj().T


def _check_occupation(n1, n2):
    for n in (n1, n2):
        if int(n) != n or n < 0:
            raise DomainError(f"occupation numbers must be non-negative integers, got {n!r}")
    return int(n1), int(n2)


def q13_moments(gammas, n1: int = 0, n2: int = 0) -> QuadraticMoments:
    """Closed-form moments from a 2x4 array of real eigenvector coefficients.

    Row ``j`` holds the coefficients of mode ``j``; for a normalized
    decomposition pass :attr:`NormalModeDecomposition.scaled_gamma`.
    """
    n1, n2 = _check_occupation(n1, n2)
    g = np.asarray(gammas, dtype=float)
    if g.shape != (2, 4):
        raise DomainError(f"gammas must be 2x4, got {g.shape}")
    w = np.array([2 * n1 + 1, 2 * n2 + 1], dtype=float)
    c1, c2, c3, c4 = g.T
    return QuadraticMoments(
        q11=float(w @ (c2 * c2)),
        q12=float(np.sum(c1 * c2)),
        q13=float(np.sum(c2 * c4)),
        q14=float(-(w @ (c2 * c3))),
        q22=float(w @ (c1 * c1)),
        q23=float(w @ (c1 * c4)),
        q24=float(np.sum(c1 * c3)),
        q33=float(w @ (c4 * c4)),
        q34=float(np.sum(c3 * c4)),
        q44=float(w @ (c3 * c3)),
        n1=n1,
        n2=n2,
    )


def mode_gammas(dp: DerivedParams, convention: str = "physical") -> np.ndarray:
    """Eigenvector coefficients feeding :func:`q13_moments`.

    ``"physical"`` gives the symplectically normalized coefficients, so the
    resulting covariance obeys the uncertainty principle. ``"paper"`` uses the
    raw closed forms with unit normalization constants; this reproduces the
    published toy-model and commutative-limit expressions but is not a
    physical covariance in general.
    """
    if convention == "physical":
        return build_Q(dp).scaled_gamma
    if convention == "paper":
        return np.vstack([paper_gammas(dp, lam) for lam in normal_frequencies(dp)])
    raise DomainError(f"unknown convention {convention!r}; choose from {CONVENTIONS}")


def moments_for(dp: DerivedParams, n1: int = 0, n2: int = 0, convention: str = "physical") -> QuadraticMoments:
    return q13_moments(mode_gammas(dp, convention), n1, n2)


def commutative_blocks(qm: QuadraticMoments) -> CovarianceMatrix:
    """Commutative-frame covariance: diagonal local blocks and an anti-diagonal cross block."""
    v = np.array([
        [qm.q11, 0.0, 0.0, qm.q14],
        [0.0, qm.q22, qm.q23, 0.0],
        [0.0, qm.q23, qm.q33, 0.0],
        [qm.q14, 0.0, 0.0, qm.q44],
    ])
    return CovarianceMatrix(v, Frame.COMMUTATIVE)


def nc_covariance(qm: QuadraticMoments, nc: NCParams, method: str = "explicit") -> CovarianceMatrix:
    """Noncommutative-frame covariance.

    ``"explicit"`` fills the six nonzero entries from the moments;
    ``"conjugation"`` pushes :func:`commutative_blocks` through the Bopp shift.
    """
    if method == "conjugation":
        u = bopp_shift(nc)
        return CovarianceMatrix(u @ commutative_blocks(qm).entries @ u.T, Frame.NONCOMMUTATIVE)
    if method != "explicit":
        raise ValueError(f"unknown method {method!r}")
    th, et, hb = nc.theta, nc.eta, nc.hbar
    r = nc.hbar_e / hb
    v = np.zeros((4, 4))
    v[0, 0] = qm.q11 - th / hb * qm.q14 + th * th / (4 * hb * hb) * qm.q44
    v[1, 1] = qm.q22 + et / hb * qm.q23 + et * et / (4 * hb * hb) * qm.q33
    v[2, 2] = qm.q33 + th / hb * qm.q23 + th * th / (4 * hb * hb) * qm.q22
    v[3, 3] = qm.q44 - et / hb * qm.q14 + et * et / (4 * hb * hb) * qm.q11
    v[0, 3] = v[3, 0] = r * qm.q14 - et / (2 * hb) * qm.q11 - th / (2 * hb) * qm.q44
    v[1, 2] = v[2, 1] = r * qm.q23 + th / (2 * hb) * qm.q22 + et / (2 * hb) * qm.q33
    return CovarianceMatrix(v, Frame.NONCOMMUTATIVE)


def _tilde(beta):
    b1, b2 = (complex(x) for x in beta)
    return np.array([b1, b1.conjugate(), b2, b2.conjugate()])


def _real_or_raise(z, tol, what):
    resid = float(np.max(np.abs(np.imag(z)))) if np.size(z) else 0.0
    if resid > tol * max(1.0, float(np.max(np.abs(z)))):
        raise ConsistencyError(f"{what} has imaginary residue {resid:.3e}; check the normalization of Q")
    return np.real(z).astype(float)


def expectation_positions(beta, Q, nc: NCParams, tol: float = IMAG_TOL) -> np.ndarray:
    """First moments ``<(x1, p1, x2, p2)>`` in the noncommutative frame."""
    z = bopp_shift(nc) @ (np.asarray(Q) @ _tilde(beta))
    return _real_or_raise(z, tol, "first moment")


def covariance_via_expectations(beta, Q, nc: NCParams, n1: int = 0, n2: int = 0,
                                tol: float = IMAG_TOL) -> CovarianceMatrix:
    """Noncommutative covariance from ladder-operator moments of the displaced state.

    Builds ``<A_l A_m>`` for ``A = (a1, a1^dag, a2, a2^dag)``, maps through
    ``Q`` and the Bopp shift, symmetrizes, then subtracts the first moments.
    """
    n1, n2 = _check_occupation(n1, n2)
    bt = _tilde(beta)
    m = np.outer(bt, bt)
    m[0, 1] += n1 + 1
    m[1, 0] += n1
    m[2, 3] += n2 + 1
    m[3, 2] += n2
    t = bopp_shift(nc) @ np.asarray(Q)
    second = t @ m @ t.T
    sym = _real_or_raise(0.5 * (second + second.T), tol, "symmetrized second moment")
    mean = expectation_positions(beta, Q, nc, tol)
    return CovarianceMatrix(sym - np.outer(mean, mean), Frame.NONCOMMUTATIVE)


def commutative_limit_ps(m1: float, m2: float, w1: float, w2: float) -> float:
    """Separability functional of the unnormalized ground-state moments as the deformation vanishes (``hbar = 1``)."""
    for name, x in (("m1", m1), ("m2", m2), ("w1", w1), ("w2", w2)):
        if not x > 0:
            raise DomainError(f"{name} must be positive")
    return 1.0 / 16.0 - 0.25 * m1 ** 2 * m2 ** 4 * w1 ** 2 * (w2 ** 2 - w1 ** 2) ** 4


def pipeline_covariance(dp: DerivedParams, n1: int = 0, n2: int = 0,
                        convention: str = "physical") -> CovarianceMatrix:
    """Commutative-frame covariance of the displaced number state at one instant."""
    return as_covariance(commutative_blocks(moments_for(dp, n1, n2, convention)))
