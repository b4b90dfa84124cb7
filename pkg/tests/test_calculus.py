import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from noncyl import calculus as C

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False, allow_subnormal=False)
qs = st.sampled_from([0.5, 1.0, 2.0, 3.0])
vec3 = arrays(np.float64, 3, elements=finite)


def test_power_scalar_and_vector():
    assert C.power(np.float64(2.0), 3.0) == 8.0
    assert C.power(np.float64(-2.0), 3.0) == -8.0
    v = C.power(np.array([3.0, 4.0]), 2.0)
    np.testing.assert_allclose(v, [15.0, 20.0])   # |u| u with |u| = 5
    assert np.all(C.power(np.zeros(3), 0.5) == 0)
    with pytest.raises(ValueError):
        C.power(1.0, 0.0)


def test_boundary_term_special_values():
    q = 1.5
    v = np.array([0.3, -1.2])
    # u = 0 leaves only |v|^{q+1}/(q+1)
    assert C.boundary_term(np.zeros(2), v, q) == pytest.approx(np.linalg.norm(v) ** (q + 1) / (q + 1))
    assert C.boundary_term(v, v, q) == pytest.approx(0.0, abs=1e-15)
    # q = 1 reduces to half the squared distance
    u = np.array([1.0, 2.0])
    assert C.boundary_term(u, v, 1.0) == pytest.approx(0.5 * np.sum((u - v) ** 2))


@settings(max_examples=300, deadline=None)
@given(vec3, vec3, qs)
def test_boundary_term_is_bregman_distance(u, v, q):
    """Independent route: phi(v) - phi(u) - Dphi(u).(v - u), phi = |.|^{q+1}/(q+1)."""
    phi = lambda z: np.linalg.norm(z) ** (q + 1) / (q + 1)
    r = np.linalg.norm(u)
    dphi = r ** q * (u / r) if r > 0 else np.zeros(3)
    ref = phi(v) - phi(u) - dphi @ (v - u)
    mag = np.linalg.norm(u) ** (q + 1) + np.linalg.norm(v) ** (q + 1)
    assert C.boundary_term(u, v, q) == pytest.approx(ref, abs=1e-12 * max(mag, 1e-300))


@settings(max_examples=300, deadline=None)
@given(vec3, vec3, qs)
def test_boundary_term_nonnegative_and_identity(u, v, q):
    mag = np.linalg.norm(u) ** (q + 1) + np.linalg.norm(v) ** (q + 1)
    b_uv, b_vu = C.boundary_term(u, v, q), C.boundary_term(v, u, q)
    pair = C.monotone_pairing(u, v, q)
    slack = 16 * np.finfo(float).eps * mag
    assert b_uv >= -slack
    assert b_uv <= pair + slack
    assert abs(b_uv + b_vu - pair) <= 1e-12 * max(mag, 1e-300)


def test_integrand_spec_validation():
    with pytest.raises(ValueError):
        C.prototype(1.0, 1.0)
    with pytest.raises(KeyError):
        C.make_integrand("nope", 2.0, 1.0)
    assert C.prototype(3.0, 1.0).p_conj == pytest.approx(1.5)


@pytest.mark.parametrize("name,kw", [("prototype", {"weight": 0.5}), ("regularized", {"delta": 0.2}),
                                     ("lower_order", {"mu": 0.7, "g": 0.1})])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_builtin_integrands_satisfy_structure(name, kw, p):
    spec = C.make_integrand(name, p, 1.0, **kw)
    rng = np.random.default_rng(0)
    s = C.draw_samples(rng, 5000, 2)
    verdict = C.integrand_growth_check(spec, s)
    assert verdict.ok, verdict.worst
    assert np.isfinite(verdict.lipschitz_constant)
    t = C.draw_samples(np.random.default_rng(1), 5000, 2)
    assert C.midpoint_convexity_violations(spec, s, t) == 0


def test_growth_check_flags_bad_integrand():
    spec = C.prototype(2.0, 1.0, 1.0)
    bad = C.IntegrandSpec(2.0, 1.0, 1.0, 1.0, lambda x, u, xi: 0.1 * C._frob(xi) ** 2,
                          spec.dxi_f, spec.du_f, name="bad")
    v = C.integrand_growth_check(bad, C.draw_samples(np.random.default_rng(0), 100, 2))
    assert not v.ok and v.lower_violations > 0


def test_nonconvex_integrand_detected():
    base = C.prototype(2.0, 1.0)
    wavy = C.IntegrandSpec(2.0, 1.0, 0.1, 2.0,
                           lambda x, u, xi: C._frob(xi) ** 2 * (1 + 0.9 * np.sin(5 * C._frob(xi))),
                           base.dxi_f, base.du_f, name="wavy")
    a = C.draw_samples(np.random.default_rng(0), 2000, 2)
    b = C.draw_samples(np.random.default_rng(1), 2000, 2)
    assert C.midpoint_convexity_violations(wavy, a, b) > 0


def test_pair_constants_q1_closed_form():
    # q = 1: the power map is the identity and b = |u - v|^2 / 2
    fit = C.fit_pair_constants(1.0, np.random.default_rng(0), n_scan=2000, n_random=2000)
    assert fit["equivalence"] == pytest.approx(1.0, abs=1e-12)
    assert fit["boundary"] == pytest.approx(2.0, rel=1e-9)
    assert fit["half_power"] == pytest.approx(1.0, rel=1e-9)


def test_pair_constants_q2_frozen():
    # worst collinear pair u = e1, v = -e1 gives (|u|+|v|)|v-u| / |[v]^2-[u]^2| = 2
    fit = C.fit_pair_constants(2.0, np.random.default_rng(0), n_scan=20000, n_random=2000)
    assert fit["equivalence"] == pytest.approx(2.0, rel=1e-9)
    assert fit["power_gap"] == pytest.approx(2.0, rel=1e-9)


def test_collinear_scan_reduces_random_pairs():
    """Random pairs never need a larger constant than the collinear scan
    (0-homogeneity plus rotation invariance for N = 1)."""
    q = 0.5
    s = np.linspace(-1, 1, 20001)
    scan = C.pair_constants(C.collinear_scan(q, s))
    rng = np.random.default_rng(4)
    u = rng.standard_normal((5000, 1))
    v = rng.standard_normal((5000, 1))
    rand = C.pair_constants(C.pair_inequalities(u, v, q))
    for k in ("equivalence", "half_power", "boundary"):
        assert rand[k] <= scan[k] * (1 + 1e-6)
