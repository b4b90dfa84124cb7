import numpy as np
import pytest
from scipy.sparse import linalg as splinalg

from conftest import solved
from noncyl import calculus, geometry, verify as V
from noncyl.fields import cell_weights, scalar_field
from oracles import stiffness


def test_zero_scenario_lateral_map_is_equality():
    sc, rec = solved("zero")
    u = rec.u
    fam = V.comparison_family(u, sc.domain, sc.spec, seed=0)
    for j in (1, u.K // 2, u.K):
        assert V.variational_residual(u, fam["lateral"], j, u.values[0], sc.spec) == 0.0
    rep = V.certify_solution(u, sc.domain, sc.spec)
    assert rep.ok
    assert V.energy_certificate(u, u.values[0], sc.spec).min_slack == 0.0


def test_heat_certified_and_inflated_field_rejected():
    sc, rec = solved("heat")
    u = rec.u
    assert V.certify_solution(u, sc.domain, sc.spec).ok
    big = u.with_values(10 * u.values)
    assert not V.energy_certificate(big, u.values[0], sc.spec).ok


def test_localization_is_additive():
    sc, rec = solved("shrinking_ball")
    u = rec.u
    fam = V.comparison_family(u, sc.domain, sc.spec, seed=2)
    u_o = u.values[0]
    for name in ("mollified", "bump"):
        v = fam[name]
        jo, j = u.K // 3, u.K
        whole = V.variational_residual(u, v, j, u_o, sc.spec)
        head = V.variational_residual(u, v, jo, u_o, sc.spec)
        tail = V.localized_residual(u, v, jo, j, sc.spec)
        assert head + tail == pytest.approx(whole, rel=1e-12, abs=1e-14)
    with pytest.raises(ValueError):
        V.localized_residual(u, fam["lateral"], 3, 3, sc.spec)


def test_inadmissible_map_refused():
    sc, rec = solved("shrinking_ball")
    u = rec.u
    bad = V.make_comparison(u.values + 1.0, u, sc.domain, "shifted")
    assert not bad.admissible
    with pytest.raises(ValueError):
        V.variational_residual(u, bad, 1, u.values[0], sc.spec)
    with pytest.raises(IndexError):
        V.variational_residual(u, V.comparison_family(u, sc.domain, sc.spec)["lateral"],
                               u.K + 1, u.values[0], sc.spec)


def test_integration_by_parts_two_sided_on_cylinder():
    sc, rec = solved("heat")
    rep = V.certify_solution(rec.u, sc.domain, sc.spec)
    rev = [c for c in rep.checks if c.name.startswith("ibp_reverse")]
    assert rev and all(c.ok for c in rev)


def test_trapezoid_validation():
    z = V.trapezoid(0.1, 0.2, 0.3, 0.4)
    np.testing.assert_allclose(z([0.0, 0.15, 0.25, 0.35, 0.5]), [0, 0.5, 1, 0.5, 0])
    with pytest.raises(ValueError):
        V.trapezoid(0.2, 0.1, 0.3, 0.4)
    sc, rec = solved("heat")
    with pytest.raises(ValueError):
        V.int_by_parts_terms(rec.u, rec.u, V.trapezoid(0.0, 0.01, 0.02, 0.03), sc.spec)


def _random_u(seed, K=6, m=7, h_x=1 / 6, h_t=0.01):
    vals = np.random.default_rng(seed).standard_normal((K + 1, m, m))
    return scalar_field(vals, h_x, h_t)


def test_dual_pairing_linear_and_shift_invariant():
    u = _random_u(0)
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((2,) + u.values.shape)
    q = 0.7
    lin = V.dual_pairing(u, 2 * a - 3 * b, q)
    assert lin == pytest.approx(2 * V.dual_pairing(u, a, q) - 3 * V.dual_pairing(u, b, q))
    # shifting u and phi together by two steps leaves the pairing unchanged
    phi = np.zeros_like(u.values)
    phi[1:-1] = rng.standard_normal(phi[1:-1].shape)
    pad = np.zeros((2,) + u.values.shape[1:])
    us = u.with_values(np.concatenate([np.repeat(u.values[:1], 2, axis=0), u.values]))
    ps = np.concatenate([pad, phi])
    assert V.dual_pairing(us, ps, q) == pytest.approx(V.dual_pairing(u, phi, q), rel=1e-12)


def test_dual_norm_p2_matches_linear_algebra():
    """For p = 2 the slice sup is sqrt(g_w^T A^{-1} g_w), A = W + sum D^T W D."""
    u = _random_u(3)
    dom = geometry.cylinder((1.0, 1.0), u.K * u.h_t)
    spec = calculus.prototype(2.0, 1.0)
    got = V.dual_norm_exact(u, dom, spec)
    W, S = stiffness(u.shape, u.h_x)
    A = (W + S).tocsr()
    free = geometry.interior_mask(u.shape).ravel()
    Aff = A[free][:, free].tocsc()
    w = cell_weights(u.shape, u.h_x).ravel()
    tot = 0.0
    for k in range(1, u.K):
        g = (u.values[k + 1, ..., 0] - u.values[k, ..., 0]).ravel() * w
        s = np.sqrt(g[free] @ splinalg.spsolve(Aff, g[free]))
        tot += u.h_t * (s / u.h_t) ** 2
    assert got == pytest.approx(np.sqrt(tot), rel=1e-6)


def test_bump_estimate_below_exact_dual_norm():
    sc, rec = solved("shrinking_ball")
    u = rec.u
    fam = V.bump_family(u, sc.domain, count=6, seed=0)
    est, bound = V.dual_norm_estimate(u, fam, sc.spec, u.values[0], sc.domain.T)
    exact = V.dual_norm_exact(u, sc.domain, sc.spec)
    assert 0 < est <= exact * (1 + 1e-8)
    assert bound > 0
    with pytest.raises(ValueError):
        V.dual_norm_estimate(u, [], sc.spec, u.values[0], sc.domain.T)


def test_energy_constants_vanish_for_zero_data():
    z = np.zeros((9, 9, 1))
    c = V.energy_constants(z, z, calculus.prototype(2.0, 1.0), 1.0, 1 / 8)
    assert c["C1p"] == 0.0 and c["C2q1"] == 0.0


def test_chain_slack_nonnegative_for_solutions():
    for name in ("heat", "shrinking_ball"):
        sc, rec = solved(name)
        rep = V.energy_certificate(rec.u, rec.u.values[0], sc.spec)
        assert rep.ok and V.chain_slack(rep) >= 0


def test_initial_attainment_and_continuity_heat():
    sc, rec = solved("heat", level=1)
    u = rec.u
    probe = geometry.rasterize(sc.domain, 0.0, u.h_x).dist > 0.2
    seq = V.initial_attainment(u, u.values[0], probe, sc.domain, 1.0)
    assert V.attainment_verdict(seq, 1e-3)
    mod = V.time_continuity_modulus(u, 1.0)
    vals = [mod[d] for d in sorted(mod)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        V.initial_attainment(u, u.values[0], np.ones(u.shape, bool), sc.domain, 1.0)


def test_shrink_indicator_small_for_regular_boundary():
    sc, rec = solved("shrinking_ball")
    ind = V.shrink_indicator(rec.u, sc.domain, sc.spec.q)
    assert 0 <= ind < 0.1
    assert V.shrink_indicator(rec.u, sc.domain, sc.spec.q, min_nodes=10 ** 9) == 0.0


def test_report_bookkeeping():
    rep = V.DiagnosticsReport()
    rep.add("a", 1.0, 2.0)
    rep.add("b", 2.0, 1.0, tol=0.5)
    assert not rep.ok and rep.min_slack == -1.0
    rep2 = V.DiagnosticsReport()
    rep2.add("c", 1.0, 1.0 - 1e-20, tol=1e-18)
    assert rep2.ok
