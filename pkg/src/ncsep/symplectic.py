"""Symplectic forms and the Bopp shift between commutative and NC phase space.

All 4x4 matrices act on the coordinate vector ordered ``(x1, p1, x2, p2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
I2 = np.eye(2)
SIGMA_Y2 = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z2 = np.array([[1.0, 0.0], [0.0, -1.0]])

#: block-diagonal Pauli matrices diag(sigma, sigma)
SIGMA_Y = np.kron(I2, SIGMA_Y2)
SIGMA_Z = np.kron(I2, SIGMA_Z2)

SCHUR_FLOOR = 1e-12


def _check_scalar(name, value, *, positive=False):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if positive and value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    if value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")


def effective_planck(theta: float, eta: float, hbar: float = 1.0) -> float:
    """Effective Planck constant ``hbar * (1 + theta*eta / (4 hbar^2))``."""
    _check_scalar("hbar", hbar, positive=True)
    _check_scalar("theta", theta)
    _check_scalar("eta", eta)
    return hbar * (1.0 + theta * eta / (4.0 * hbar * hbar))


@dataclass(frozen=True)
class NCParams:
    """Noncommutativity parameters.

    ``theta`` deforms ``[x1, x2]``, ``eta`` deforms ``[p1, p2]``. Both are
    restricted to ``[0, hbar]``.
    """

    theta: float = 0.0
    eta: float = 0.0
    hbar: float = 1.0
    hbar_e: float = field(init=False)

    def __post_init__(self):
        _check_scalar("hbar", self.hbar, positive=True)
        for name in ("theta", "eta"):
            v = getattr(self, name)
            _check_scalar(name, v)
            if v > self.hbar:
                raise DomainError(f"{name}={v} exceeds hbar={self.hbar}")
        object.__setattr__(self, "hbar_e", effective_planck(self.theta, self.eta, self.hbar))

    @property
    def pi_matrix(self) -> np.ndarray:
        return np.diag([self.theta, self.eta])

    @property
    def schur_det(self) -> float:
        """Determinant of the Schur complement, ``(1 - theta*eta/4hbar^2)^2``."""
        return (1.0 - self.theta * self.eta / (4.0 * self.hbar**2)) ** 2


def standard_symplectic() -> np.ndarray:
    return np.kron(I2, J2)


def deformed_symplectic(nc: NCParams) -> np.ndarray:
    """Deformed form whose entries encode ``[X_a, X_b] = i hbar_e Jt_ab`` in NC space."""
    off = nc.pi_matrix / nc.hbar_e
    return np.block([[J2, off], [-off, J2]])


def _shift_block(nc: NCParams) -> np.ndarray:
    return nc.pi_matrix @ J2 / (2.0 * nc.hbar)


def bopp_shift(nc: NCParams) -> np.ndarray:
    """Darboux matrix ``U`` with ``X_nc = U @ X_c``.

    Explicitly ``x1~ = x1 - theta/(2hbar) p2``, ``p1~ = p1 + eta/(2hbar) x2``,
    ``x2~ = x2 + theta/(2hbar) p1``, ``p2~ = p2 - eta/(2hbar) x1``.
    """
    b = _shift_block(nc)
    return np.block([[I2, -b], [b, I2]])


def bopp_shift_inverse(nc: NCParams) -> np.ndarray:
    """Closed-form inverse of :func:`bopp_shift` through its Schur complement."""
    delta = nc.schur_det
    if delta < SCHUR_FLOOR:
        raise SingularityError(f"Schur complement determinant {delta:.3e} is singular")
    b = _shift_block(nc)
    return np.block([[I2, b], [-b, I2]]) / math.sqrt(delta)


def symplectic_correspondence_residual(nc: NCParams) -> float:
    """Max-abs residual of ``hbar_e * Jt = hbar * U J U^T``."""
    u = bopp_shift(nc)
    lhs = nc.hbar_e * deformed_symplectic(nc)
    rhs = nc.hbar * u @ standard_symplectic() @ u.T
    return float(np.max(np.abs(lhs - rhs)))
