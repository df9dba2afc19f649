"""Structural identities evaluated on a configuration, for the ``check`` command."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import OscillatorConfig, build_hamiltonian, build_omega, build_Q, derived_params
from .covariance import commutative_blocks, covariance_via_expectations, moments_for, nc_covariance
from .separability import nc_to_commutative, rsup_check
from .symplectic import bopp_shift, bopp_shift_inverse, symplectic_correspondence_residual


@dataclass(frozen=True)
class CheckResult:
    name: str
    t: float
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)


def checks_at(cfg: OscillatorConfig, t: float, seed: int = 0) -> list[CheckResult]:
    """Every identity the pipeline relies on, as ``residual <= threshold`` pairs."""
    dp = derived_params(cfg, t)
    nc = dp.nc
    out = [
        CheckResult("symplectic_correspondence", t, symplectic_correspondence_residual(nc), 1e-13),
        CheckResult("shift_inverse", t, float(np.max(np.abs(bopp_shift_inverse(nc) @ bopp_shift(nc) - np.eye(4)))), 1e-12),
        CheckResult("b_positive", t, -dp.b, 0.0),
        CheckResult("c_nonnegative", t, -dp.c, 1e-12),
        CheckResult("discriminant_nonnegative", t, -dp.delta, 1e-12),
    ]
    omega = build_omega(build_hamiltonian(dp)[0])
    dec = build_Q(dp)
    res = dec.residuals(omega)
    out += [
        CheckResult("q_diagonalization", t, res["diagonalization"] / max(1.0, float(np.max(np.abs(omega)))), 1e-10),
        CheckResult("q_adjoint", t, res["adjoint"], 1e-10),
        CheckResult("q_symplectic", t, res["symplectic"], 1e-10),
        CheckResult("frequency_product", t,
                    abs(dec.lambda1 * dec.lambda2 - np.sqrt(dp.c)) / max(np.sqrt(dp.c), 1e-300), 1e-10),
    ]
    qm = moments_for(dp)
    v = commutative_blocks(qm)
    rs = rsup_check(v, cfg.hbar)
    out.append(CheckResult("rsup_min_eigenvalue", t, -rs.min_eigenvalue, 1e-10))
    vnc = nc_covariance(qm, nc)
    out.append(CheckResult("nc_paths", t, float(np.max(np.abs(vnc.entries - nc_covariance(qm, nc, "conjugation").entries))), 1e-12))
    out.append(CheckResult("frame_roundtrip", t, float(np.max(np.abs(nc_to_commutative(vnc, nc).entries - v.entries))), 1e-12))
    rng = np.random.default_rng(seed)
    beta = rng.normal(size=2) + 1j * rng.normal(size=2)
    vb = covariance_via_expectations(beta, dec.Q, nc)
    out.append(CheckResult("displacement_independence", t, float(np.max(np.abs(vb.entries - vnc.entries))), 1e-11))
    return out
