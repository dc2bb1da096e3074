import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from ricci_willmore.errors import DomainError, PreconditionError, RangeError
from ricci_willmore.manifold import GeodesicBallDomain, RotSymManifold
from ricci_willmore.ode import focal_bound_check, solve_psi_pair
from ricci_willmore.profiles import DecayProfile
from ricci_willmore.tube import (
    cnp_constant,
    det_upper_bound,
    evolve_riccati_free,
    evolve_tube,
    hyperbolic_comparators,
    verify_jacobian_comparison,
    verify_lp_mean_comparison,
)

ZERO = DecayProfile.zero()


def test_hyperbolic_tube_closed_forms(hyperbolic2):
    evo = evolve_tube(GeodesicBallDomain(hyperbolic2, 1.0), 10.0)
    t = evo.grid
    np.testing.assert_allclose(evo.m, 2 / np.tanh(1 + t), rtol=1e-12)
    np.testing.assert_allclose(evo.logJ[1:], 2 * np.log(np.sinh(1 + t[1:]) / math.sinh(1)), rtol=1e-12)
    assert evo.m[0] == pytest.approx(2 / math.tanh(1.0), rel=1e-15)
    assert evo.logJ[0] == 0.0
    assert np.all(evo.phi == 0.0)
    assert max(evo.consistency().values()) <= 1e-6


def test_zero_warp_tube_matches_hyperbolic(hyperbolic2):
    zero = RotSymManifold(2, ZERO, r_max=15)
    a = evolve_tube(GeodesicBallDomain(zero, 1.0), 10.0)
    b = evolve_tube(GeodesicBallDomain(hyperbolic2, 1.0), 10.0)
    np.testing.assert_allclose(a.m, b.m, atol=1e-7)
    np.testing.assert_allclose(a.logJ, b.logJ, atol=1e-7)


def test_tube_range_checked(hyperbolic2):
    with pytest.raises(RangeError):
        evolve_tube(GeodesicBallDomain(hyperbolic2, 1.0), 50.0)


def test_riccati_free_stationary_and_closed_form():
    evo = evolve_riccati_free(ZERO, 2.0, 2, 5.0)
    np.testing.assert_allclose(evo.m, 2.0, rtol=1e-14)
    evo = evolve_riccati_free(ZERO, 3 / math.tanh(0.7), 3, 5.0)
    np.testing.assert_allclose(evo.m, 3 / np.tanh(0.7 + evo.grid), rtol=1e-10)
    np.testing.assert_allclose(evo.logJ, 3 * np.log(np.sinh(0.7 + evo.grid) / math.sinh(0.7)), rtol=1e-10,
                               atol=1e-12)
    assert evo.blow_up is None


def test_riccati_free_blow_up_before_focal_bound():
    evo = evolve_riccati_free(ZERO, -6.0, 2, 5.0)
    t0 = focal_bound_check(0.0, -3.0)
    assert evo.blow_up is not None
    assert evo.blow_up <= t0
    assert evo.blow_up == pytest.approx(math.atanh(1 / 3), abs=1e-5)


def test_det_upper_bound_examples():
    assert det_upper_bound(0, 0, 2, 1.0) == pytest.approx(2 * math.log(math.cosh(1)), rel=1e-14)
    r0, t = 0.8, np.linspace(0.1, 5, 20)
    np.testing.assert_allclose(det_upper_bound(0, 3 / math.tanh(r0), 3, t),
                               3 * np.log(np.sinh(r0 + t) / math.sinh(r0)), rtol=1e-13)
    assert det_upper_bound(1, 0, 2, 2.0) == pytest.approx(
        2 * math.log(math.cosh(2) + 2 * math.sinh(2)) + 4, rel=1e-14)
    assert math.isnan(det_upper_bound(0, -6, 2, 2.0))


def test_comparator_examples():
    t = np.linspace(0.0, 20.0, 41)
    m, lj = hyperbolic_comparators(2.0, 2, t)
    np.testing.assert_allclose(m, 2.0, rtol=1e-14)
    np.testing.assert_allclose(lj, 2 * t, rtol=1e-13, atol=1e-14)
    assert hyperbolic_comparators(0.0, 3, 1.0)[0] == pytest.approx(3 * math.tanh(1.0), rel=1e-14)
    m, _ = hyperbolic_comparators(2 / math.tanh(0.4), 2, t)
    np.testing.assert_allclose(m, 2 / np.tanh(0.4 + t), rtol=1e-13)
    with pytest.raises(DomainError):
        hyperbolic_comparators(-4.0, 2, 1.0)


def test_lp_and_jacobian_comparisons(hyperbolic2, bump_manifold):
    hyp = GeodesicBallDomain(hyperbolic2, 0.5)
    res = verify_lp_mean_comparison(hyp, 2.0, 10.0)
    assert res.lhs == 0.0 and res.rhs == 0.0 and res.margin == 0.0
    res = verify_jacobian_comparison(hyp, 2.0, 3.0)
    assert abs(res.margin) <= 1e-8 * res.rhs
    bump = GeodesicBallDomain(bump_manifold, 0.5)
    for step in (1e-3, 5e-4):
        assert verify_lp_mean_comparison(bump, 2.0, 10.0, step).margin >= 0
        assert verify_jacobian_comparison(bump, 2.0, 3.0, step).margin >= 0
    near = verify_jacobian_comparison(bump, 2.0, 1e-4, 1e-5)
    assert near.lhs == pytest.approx(1.0, abs=1e-3) and abs(near.margin) <= 1e-6
    flat = RotSymManifold(2, DecayProfile.smooth_bump(0.0, 1.0, 2.0))
    assert verify_lp_mean_comparison(GeodesicBallDomain(flat, 0.5), 2.0, 10.0).margin == 0.0


def test_comparisons_need_mean_convexity_and_p(bump_manifold):
    dom = GeodesicBallDomain(bump_manifold, 0.5)
    with pytest.raises(PreconditionError):
        verify_lp_mean_comparison(dom, 1.5, 5.0)
    with pytest.raises(PreconditionError):
        verify_jacobian_comparison(dom, 1.2, 1.0)


@pytest.mark.parametrize("n,p", [(2, 2.0), (1, 2.0), (3, 2.5), (2, 1.5 + 1e-6)])
def test_cnp_against_quadrature(n, p):
    alpha = n / (2 * p - 1)
    tail = lambda T: 2 ** alpha * math.exp(-alpha * T) / alpha  # sech^a ~ 2^a e^{-a t}
    vals = [quad(lambda t: math.cosh(t) ** -alpha, 0, T, epsabs=0, epsrel=1e-13, limit=400)[0] + tail(T)
            for T in (60.0, 80.0)]
    assert abs(vals[0] - vals[1]) <= 1e-9 * vals[1]
    expected = vals[1] ** (1 - 1 / (2 * p)) / (2 * p)
    assert cnp_constant(n, p) == pytest.approx(expected, rel=1e-9)


def test_cnp_rejects_small_p():
    with pytest.raises(PreconditionError):
        cnp_constant(2, 1.5)


mono = st.one_of(
    st.builds(DecayProfile.exponential, st.floats(0.0, 2.0), st.floats(0.3, 3.0)),
    st.builds(DecayProfile.power, st.floats(0.0, 2.0), st.floats(1.5, 4.0)),
)


@settings(max_examples=12, deadline=None)
@given(mono, st.sampled_from([1, 2, 3]), st.floats(0.2, 2.0))
def test_determinant_estimate_and_riccati_comparison(profile, n, r0):
    man = RotSymManifold(n, profile, r_max=r0 + 8.0)
    dom = GeodesicBallDomain(man, r0)
    evo = evolve_tube(dom, 8.0)
    H = dom.mean_curvature
    bound = det_upper_bound(profile.mass(), H, n, evo.grid)
    assert np.all(evo.logJ <= bound + 1e-7)
    assert np.all(evo.phi >= 0)
    assert max(evo.consistency().values()) <= 1e-6
    s1, s2 = solve_psi_pair(profile.along_geodesic(r0), 8.0, 1e-3)
    k = H / n
    dlog_psi = (s2.dpsi + k * s1.dpsi) / (s2.psi + k * s1.psi)
    assert len(dlog_psi) == len(evo.m)
    assert np.all(evo.m / n <= dlog_psi + 1e-7)


@settings(max_examples=15, deadline=None)
@given(mono, st.floats(-8.0, -1.05))
def test_blow_up_consistency(profile, k):
    two_b = 2 * profile.mass()
    if not k < -1 - two_b:
        return
    evo = evolve_riccati_free(profile.along_geodesic(0.5), 2 * k, 2, 5.0)
    assert evo.blow_up is not None
    assert evo.blow_up <= focal_bound_check(two_b, k) + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.9, 5.0), st.integers(1, 4))
def test_comparator_identities(k, n):
    t = np.linspace(0, 6, 6001)
    m, lj = hyperbolic_comparators(n * k, n, t)
    h = t[1] - t[0]

    def d4(y):
        return (8 * (y[3:-1] - y[1:-3]) - (y[4:] - y[:-4])) / (12 * h)

    assert np.max(np.abs(d4(m) + m[2:-2] ** 2 / n - n)) <= 1e-6
    assert np.max(np.abs(d4(lj) - m[2:-2])) <= 1e-6
