import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncsep import NCParams
from ncsep.errors import ValidationError
from ncsep.separability import (
    CovarianceMatrix, Frame, Verdict, commutative_to_nc, local_invariants, mirror_reflection,
    nc_to_commutative, rsup_check, separability_report, simon_ps, symplectic_eigenvalues,
    williamson_normal_form,
)
from oracles import (
    ppt_min_symplectic_eigenvalue, random_local_symplectic, random_physical_covariance,
    two_mode_squeezed,
)

seeds = st.integers(0, 2**32 - 1)


def test_vacuum_is_marginal_and_saturates():
    v = 0.5 * np.eye(4)
    rep = separability_report(v)
    assert rep.ps == 0.0
    assert rep.verdict is Verdict.MARGINAL
    assert rep.rsup_ok
    assert rsup_check(v).min_eigenvalue == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_two_mode_squeezed_vacuum_is_entangled(r):
    v = two_mode_squeezed(r)
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    d1, d2, d12, dv, tau = local_invariants(v)
    assert d1 == pytest.approx(c * c / 4)
    assert d12 == pytest.approx(-s * s / 4)
    assert dv == pytest.approx(1 / 16)
    rep = separability_report(v)
    assert rep.verdict is Verdict.ENTANGLED
    assert rep.rsup_ok
    assert ppt_min_symplectic_eigenvalue(v) < 0.5


def test_product_thermal_state_is_separable():
    v = np.diag([1.5, 1.5, 0.7, 0.7])
    assert separability_report(v).verdict is Verdict.SEPARABLE


def test_rsup_rejects_subvacuum_noise():
    v = 0.25 * np.eye(4)
    res = rsup_check(v)
    assert not res.holds
    assert not res.scalar_holds


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_invariants_under_local_symplectic(seed):
    rng = np.random.default_rng(seed)
    v = random_physical_covariance(rng)
    s = random_local_symplectic(rng)
    a = np.array(local_invariants(v))
    b = np.array(local_invariants(s @ v @ s.T))
    np.testing.assert_allclose(b, a, rtol=1e-8, atol=1e-10 * np.max(np.abs(a)))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_mirror_reflection(seed):
    v = random_physical_covariance(np.random.default_rng(seed))
    m = mirror_reflection(v)
    assert local_invariants(m).delta12 == pytest.approx(-local_invariants(v).delta12)
    np.testing.assert_array_equal(mirror_reflection(m).entries, CovarianceMatrix(v).entries)
    # Ps only sees |delta12|
    assert simon_ps(m) == pytest.approx(simon_ps(v), rel=1e-9, abs=1e-12)


def test_ps_sign_matches_ppt_oracle(rng):
    mismatches = 0
    for _ in range(1000):
        v = random_physical_covariance(rng, hbar=1.0)
        ps = simon_ps(v)
        nu = ppt_min_symplectic_eigenvalue(v)
        if abs(nu - 0.5) < 1e-9:
            continue
        mismatches += (ps >= 0) != (nu >= 0.5)
    assert mismatches == 0


@pytest.mark.parametrize("hbar", [1.0, 0.3, 2.0])
def test_rsup_scalar_and_matrix_forms_agree(hbar, rng):
    for _ in range(200):
        v = random_physical_covariance(rng, hbar)
        res = rsup_check(v, hbar)
        assert res.holds and res.scalar_holds
        # squeeze the noise below the vacuum: both forms must fail together
        bad = 0.3 * v
        res = rsup_check(bad, hbar)
        assert res.holds == res.scalar_holds


def test_symplectic_eigenvalues():
    d1, d2 = symplectic_eigenvalues(np.diag([2.0, 0.5, 3.0, 3.0]))
    assert (d1, d2) == (1.0, 3.0)
    with pytest.raises(ValidationError):
        symplectic_eigenvalues(np.diag([1.0, -1.0, 1.0, 1.0]))


@pytest.mark.parametrize("r", [0.2, 0.8])
def test_williamson_diagnostic_on_squeezed_state(r):
    w = williamson_normal_form(two_mode_squeezed(r))
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    assert w.d1 == pytest.approx(c / 2)
    assert w.d2 == pytest.approx(c / 2)
    assert w.kappa1 == pytest.approx(s / 2)
    assert w.kappa2 == pytest.approx(-s / 2)


def test_williamson_diagnostic_reconstructs_invariants(rng):
    for _ in range(50):
        v = random_physical_covariance(rng)
        inv = local_invariants(v)
        w = williamson_normal_form(v)
        s = w.d1 * w.d2
        assert w.kappa1 * w.kappa2 == pytest.approx(inv.delta12, rel=1e-8, abs=1e-10)
        assert (s - w.kappa1 ** 2) * (s - w.kappa2 ** 2) == pytest.approx(inv.delta_v, rel=1e-7)


def test_covariance_validation():
    with pytest.raises(ValidationError):
        CovarianceMatrix(np.eye(3))
    asym = np.eye(4)
    asym[0, 1] = 1e-6
    with pytest.raises(ValidationError):
        CovarianceMatrix(asym)
    bad = np.eye(4)
    bad[2, 2] = np.nan
    with pytest.raises(ValidationError):
        CovarianceMatrix(bad)


def test_frame_is_enforced():
    v = CovarianceMatrix(np.eye(4), Frame.NONCOMMUTATIVE)
    with pytest.raises(ValidationError):
        simon_ps(v)
    with pytest.raises(ValidationError):
        nc_to_commutative(CovarianceMatrix(np.eye(4)), NCParams(0.1, 0.1))


@settings(max_examples=200, deadline=None)
@given(seeds, st.floats(0, 1), st.floats(0, 1))
def test_frame_change_paths_agree(seed, th, et):
    nc = NCParams(th, et)
    v = random_physical_covariance(np.random.default_rng(seed))
    vnc = commutative_to_nc(v, nc)
    a = nc_to_commutative(vnc, nc, "blocks").entries
    b = nc_to_commutative(vnc, nc, "conjugation").entries
    np.testing.assert_allclose(a, b, atol=1e-12 * max(1.0, np.max(np.abs(v))))
    np.testing.assert_allclose(a, v, atol=1e-11 * max(1.0, np.max(np.abs(v))))


def test_report_serializes_flat():
    rep = separability_report(two_mode_squeezed(0.3))
    d = json.loads(json.dumps(rep.to_dict()))
    assert set(d) == {"delta1", "delta2", "delta12", "delta_v", "tau_v", "ps", "rsup_ok", "verdict"}
    assert d["verdict"] == "entangled"
