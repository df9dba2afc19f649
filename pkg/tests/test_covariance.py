import math

import numpy as np
import pytest
from hypothesis import given, settings

from ncsep import NCParams, OscillatorPoint
from ncsep.canonical import build_hamiltonian, build_Q, derived_params
from ncsep.covariance import (
    commutative_blocks, commutative_limit_ps, covariance_via_expectations, expectation_positions,
    moments_for, nc_covariance, pipeline_covariance, q13_moments,
)
from ncsep.errors import ConsistencyError, DomainError
from ncsep.experiment import toy_config
from ncsep.separability import Verdict, local_invariants, nc_to_commutative, separability_report
from ncsep.symplectic import standard_symplectic
from conftest import points, random_point
from oracles import ground_state_covariance

TOY0 = derived_params(toy_config(), 0.0)


def _mode_oracle(dec, n1, n2):
    """``<X_a X_b>`` summed over modes from the columns of ``Q`` multiplying ``a_j``."""
    out = np.zeros((4, 4), dtype=complex)
    for col, n in ((0, n1), (2, n2)):
        c = dec.Q[:, col]
        outer = np.outer(c, c.conj())
        out += (2 * n + 1) * outer.real + 1j * outer.imag
    return out


def test_unit_coefficients():
    qm = q13_moments([[0, 1, 0, 0], [0, 0, 0, 1]])
    assert qm.q11 == 1 and qm.q33 == 1
    assert qm.q22 == qm.q44 == 0
    assert qm.q12 == qm.q13 == qm.q14 == qm.q23 == qm.q24 == qm.q34 == 0


def test_occupation_enters_linearly():
    g = np.array([[0.3, 0.7, -0.2, 0.1], [0.5, -0.4, 0.9, 0.6]])
    a, b = q13_moments(g, 0, 0), q13_moments(g, 1, 0)
    assert b.q11 - a.q11 == pytest.approx(2 * g[0, 1] ** 2)
    assert b.q12 == a.q12  # commutator part ignores occupation
    assert not b.gaussian and a.gaussian
    with pytest.raises(DomainError):
        q13_moments(g, -1, 0)
    with pytest.raises(DomainError):
        q13_moments(g, 0.5, 0)


@pytest.mark.parametrize("n", [(0, 0), (1, 2), (3, 0)])
def test_moments_match_outer_products_on_toy(n):
    dec = build_Q(TOY0)
    qm = moments_for(TOY0, *n)
    np.testing.assert_allclose(qm.matrix(), _mode_oracle(dec, *n), atol=1e-13)


@settings(max_examples=200, deadline=None)
@given(points())
def test_commutator_part_is_canonical(point):
    dp = derived_params(point)
    qm = moments_for(dp, 2, 1)
    np.testing.assert_allclose(qm.matrix().imag, dp.hbar / 2 * standard_symplectic(), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(points())
def test_vacuum_matches_ground_state_oracle(point):
    dp = derived_params(point)
    H, _ = build_hamiltonian(dp)
    v = commutative_blocks(moments_for(dp)).entries
    oracle = ground_state_covariance(H, dp.hbar)
    np.testing.assert_allclose(v, oracle, atol=1e-12 * max(1.0, np.max(np.abs(oracle))))


def test_isotropic_commutative_vacuum():
    m, w, hb = 1.7, 0.6, 0.5
    dp = derived_params(OscillatorPoint(m, m, w, w, nc=NCParams(hbar=hb)))
    v = commutative_blocks(moments_for(dp)).entries
    np.testing.assert_allclose(v, hb / 2 * np.diag([1 / (m * w), m * w, 1 / (m * w), m * w]), rtol=1e-14)
    assert separability_report(v, hb).rsup_ok


def test_block_structure():
    qm = moments_for(TOY0)
    v = commutative_blocks(qm).entries
    zeros = [(0, 1), (0, 2), (1, 3), (2, 3)]
    for i, j in zeros:
        assert v[i, j] == 0 and v[j, i] == 0
    assert local_invariants(v).delta12 == pytest.approx(-qm.q14 * qm.q23)


@settings(max_examples=200, deadline=None)
@given(points())
def test_nc_covariance_paths_agree(point):
    dp = derived_params(point)
    qm = moments_for(dp)
    a = nc_covariance(qm, dp.nc, "explicit").entries
    b = nc_covariance(qm, dp.nc, "conjugation").entries
    scale = max(1.0, np.max(np.abs(a)))
    np.testing.assert_allclose(a, b, atol=1e-13 * scale)
    for i, j in [(0, 1), (0, 2), (1, 3), (2, 3)]:
        assert abs(a[i, j]) < 1e-13 * scale
    back = nc_to_commutative(nc_covariance(qm, dp.nc), dp.nc).entries
    np.testing.assert_allclose(back, commutative_blocks(qm).entries, atol=1e-12 * scale)


def test_nc_covariance_commutative_limit():
    qm = moments_for(derived_params(OscillatorPoint(1, 2, 1, 0.5)))
    np.testing.assert_array_equal(nc_covariance(qm, NCParams()).entries, commutative_blocks(qm).entries)


def test_toy_cross_entry():
    qm = moments_for(TOY0)
    nc = TOY0.nc
    expected = nc.hbar_e * qm.q14 / nc.hbar - nc.eta / (2 * nc.hbar) * qm.q11 - nc.theta / (2 * nc.hbar) * qm.q44
    assert nc_covariance(qm, nc).entries[0, 3] == pytest.approx(expected, rel=1e-14)
    assert nc_covariance(qm, nc, "conjugation").entries[0, 3] == pytest.approx(expected, rel=1e-12)


def test_expectations():
    dec = build_Q(TOY0)
    assert np.all(expectation_positions((0, 0), dec.Q, TOY0.nc) == 0)
    x = expectation_positions((1 + 1j, 2), dec.Q, TOY0.nc)
    assert x.dtype == float
    np.testing.assert_allclose(expectation_positions((2 + 2j, 4), dec.Q, TOY0.nc), 2 * x, rtol=1e-14)
    # decoupled: mode 1 is oscillator 2 (w = 2)
    dp = derived_params(OscillatorPoint(1, 1, 1, 2))
    x = expectation_positions((1, 0), build_Q(dp).Q, dp.nc)
    assert x[0] == x[1] == 0 and np.any(x[2:] != 0)


def test_broken_normalization_is_detected():
    dec = build_Q(TOY0)
    with pytest.raises(ConsistencyError):
        expectation_positions((1, 0.5j), 1j * dec.Q, TOY0.nc)


def test_displacement_free_covariance_on_toy():
    dec = build_Q(TOY0)
    ref = nc_covariance(moments_for(TOY0), TOY0.nc).entries
    np.testing.assert_allclose(covariance_via_expectations((0, 0), dec.Q, TOY0.nc).entries, ref, atol=1e-13)
    got = covariance_via_expectations((5 - 3j, 7j), dec.Q, TOY0.nc).entries
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_displacements_drop_out_random(rng):
    worst = 0.0
    for _ in range(100):
        dp = derived_params(random_point(rng, hbar=rng.choice([0.5, 1.0, 2.0])))
        n1, n2 = rng.integers(0, 3, 2)
        beta = rng.normal(scale=3, size=2) + 1j * rng.normal(scale=3, size=2)
        ref = nc_covariance(moments_for(dp, n1, n2), dp.nc).entries
        got = covariance_via_expectations(beta, build_Q(dp).Q, dp.nc, n1, n2).entries
        worst = max(worst, np.max(np.abs(got - ref)) / max(1.0, np.max(np.abs(ref))))
    assert worst < 1e-11


def test_commutative_limit_closed_form():
    assert commutative_limit_ps(1, 1, 1, 1) == 1 / 16
    for sign in (1, -1):
        w1 = math.sqrt(1 + sign / math.sqrt(2))
        assert commutative_limit_ps(1 / w1, 1, w1, 1) == pytest.approx(0, abs=1e-12)
    assert commutative_limit_ps(1, 1, 1, 1) > 0
    w1 = math.sqrt(3)
    assert commutative_limit_ps(1 / w1, 1, w1, 1) < 0
    with pytest.raises(DomainError):
        commutative_limit_ps(0, 1, 1, 1)


def test_conventions_on_isotropic_point():
    dp = derived_params(OscillatorPoint(1, 1, 1, 1))
    raw = separability_report(commutative_blocks(moments_for(dp, convention="paper")))
    assert raw.ps == pytest.approx(1 / 16)
    assert raw.verdict is Verdict.SEPARABLE
    phys = separability_report(commutative_blocks(moments_for(dp)))
    assert phys.verdict is Verdict.MARGINAL
    with pytest.raises(DomainError):
        moments_for(dp, convention="other")


def test_drives_do_not_reach_covariance():
    a = pipeline_covariance(derived_params(toy_config((0.0, 0.0)), 3.0)).entries
    b = pipeline_covariance(derived_params(toy_config((1.5, -2.0)), 3.0)).entries
    np.testing.assert_array_equal(a, b)


def test_excited_state_flagged_non_gaussian():
    qm = moments_for(TOY0, 1, 0)
    rep = separability_report(commutative_blocks(qm), gaussian=qm.gaussian)
    assert rep.gaussian is False
    assert rep.rsup_ok


@pytest.mark.parametrize("masses_freqs", [(0.5, 0.5, 2, 1), (1, 1, 1, 1), (1, 1.3, 1, 1), (1, 1, 1, 1.0000001)])
@pytest.mark.parametrize("theta, eta", [(0, 1e-10), (1e-7, 0), (1e-4, 1e-4), (1e-12, 0), (0.7, 0.9)])
def test_weak_coupling_vacuum_is_accurate(masses_freqs, theta, eta):
    dp = derived_params(OscillatorPoint(*masses_freqs, nc=NCParams(theta, eta)))
    v = commutative_blocks(moments_for(dp)).entries
    oracle = ground_state_covariance(build_hamiltonian(dp)[0])
    assert np.max(np.abs(v - oracle)) < 1e-12
