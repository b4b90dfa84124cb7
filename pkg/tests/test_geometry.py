import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from noncyl import geometry as G


def brute_distance(ind, h):
    idx = np.argwhere(ind)
    comp = np.argwhere(~ind)
    out = np.zeros(ind.shape)
    for i in idx:
        out[tuple(i)] = h * np.sqrt(((comp - i) ** 2).sum(1)).min()
    return out


def test_grid_shape_and_coords():
    assert G.grid_shape((1.0, 2.0), 0.25) == (5, 9)
    X = G.node_coords((1.0, 1.0), 0.5)
    assert X.shape == (3, 3, 2)
    assert X[2, 1].tolist() == [1.0, 0.5]
    for bad in [((1.0,), 0.3), ((1.0,), 0.0), ((1.0,), 0.6), ((), 0.1)]:
        with pytest.raises(ValueError):
            G.grid_shape(*bad)


@settings(max_examples=40, deadline=None)
@given(arrays(bool, (7, 6), elements=st.booleans()))
def test_distance_matches_brute_force(ind):
    ind = ind.copy()
    ind[0, 0] = False
    np.testing.assert_allclose(G.distance_to_complement(ind, 0.1), brute_distance(ind, 0.1), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(bool, (9, 9), elements=st.booleans()))
def test_distance_is_one_lipschitz_on_nodes(ind):
    ind = ind.copy()
    ind[4, 4] = False
    h = 0.2
    d = G.distance_to_complement(ind, h)
    for ax in (0, 1):
        assert np.all(np.abs(np.diff(d, axis=ax)) <= h + 1e-12)


def test_rasterize_excludes_box_faces():
    dom = G.cylinder((1.0, 1.0), 1.0)
    g = G.rasterize(dom, 0.0, 0.125)
    assert not g.indicator[0].any() and not g.indicator[:, -1].any()
    assert g.indicator[1:-1, 1:-1].all()
    # distance from the centre node to the nearest face node
    assert g.dist[4, 4] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        G.rasterize(dom, 1.5, 0.125)


def test_make_domain_kinds():
    assert G.make_domain("expanding_ball", T=1.0).kind == "monotone"
    assert G.make_domain("shrinking_ball", T=1.0).params["rate"] < 0
    assert G.make_domain("petrovskii", T=1.0, lam=0.3).params["lam"] == 0.3
    with pytest.raises(KeyError):
        G.make_domain("torus")


def test_excess_closed_forms():
    h = 1 / 64
    cyl = G.cylinder((1.0, 1.0), 1.0)
    assert G.complementary_excess(cyl, 0.1, 0.7, h) == 0.0
    grow = G.moving_ball((1.0, 1.0), 1.0, 0.1, 0.3)
    assert G.complementary_excess(grow, 0.1, 0.7, h) == 0.0
    # a shrinking ball loses the annulus R(t) <= |x| < R(s)
    shrink = G.moving_ball((1.0, 1.0), 1.0, 0.45, -0.5)
    e = G.complementary_excess(shrink, 0.1, 0.5, h)
    assert abs(e - 0.5 * 0.4) <= 2 * h
    with pytest.raises(ValueError):
        G.complementary_excess(shrink, 0.5, 0.1, h)


def test_inner_parallel_set():
    g = G.rasterize(G.cylinder((1.0, 1.0), 1.0), 0.0, 0.125)
    inner = G.inner_parallel_set(g, 0.2)
    assert np.array_equal(inner.indicator, g.dist > 0.2)
    assert inner.indicator.sum() == 25   # nodes 2..6 along each axis
    with pytest.raises(ValueError):
        G.inner_parallel_set(g, -1.0)


def test_density_half_space_and_ball():
    hs = G.half_space((1.0, 1.0), 1.0, offset=0.5)
    v = G.measure_density_check(hs, 0.0, 0.3, [0.1, 0.2], 1 / 64)
    assert v.ok and 0.3 < v.worst_ratio < 0.7
    ball = G.moving_ball((1.0, 1.0), 1.0, 0.3, 0.0)
    assert G.measure_density_check(ball, 0.0, 0.3, [0.05, 0.1], 1 / 64).ok
    with pytest.raises(ValueError):
        G.measure_density_check(ball, 0.0, 1.5, [0.1], 1 / 64)
    with pytest.raises(ValueError):
        G.measure_density_check(ball, 0.0, 0.3, [0.0], 1 / 64)


def test_growth_check_passes_and_fails():
    dom = G.moving_ball((1.0, 1.0), 0.8, 0.45, -0.5)
    times = np.linspace(0, 0.7, 8)
    good = G.profile_for(dom)
    assert good.variant == "sobolev"
    assert G.growth_condition_check(dom, good, times, 1 / 64).ok
    slow = G.GrowthProfile("sobolev", rho=lambda t: 0.1 * t, T=0.8)
    bad = G.growth_condition_check(dom, slow, times, 1 / 64)
    assert not bad.ok and bad.margin > 0.1
    with pytest.raises(ValueError):
        G.growth_condition_check(dom, good, times, 1 / 64, variant="modulus")


def test_modulus_and_inverse():
    prof = G.GrowthProfile("sobolev", rho=lambda t: 0.5 * t, T=1.0)
    assert prof.modulus(0.2) == pytest.approx(0.1)
    assert prof.modulus_inverse(0.1) == pytest.approx(0.2, rel=1e-9)
    flat = G.GrowthProfile("modulus", omega=lambda tau: 0.0, T=2.0)
    assert flat.modulus_inverse(0.01) == 2.0


def test_r_exponent_branches():
    # n = 2, q = 1: threshold (n+1)(q+1)/(n+q+1) = 3/2
    assert G.r_exponent(2, 2.0, 1.0) == pytest.approx(2.0)          # p >= q + 1: r = p'
    assert G.r_exponent(2, 1.75, 1.0) == pytest.approx(3.0)         # (7 - 4) / (7 - 6)
    assert G.r_exponent(2, 1.5, 1.0) == math.inf
    with pytest.raises(ValueError):
        G.r_exponent(2, 1.4, 1.0)


def test_classify_petrovskii():
    assert G.classify_petrovskii(0.5, 3.0) == "regular"
    assert G.classify_petrovskii(0.2, 3.0) == "irregular"
    assert G.classify_petrovskii(1 / 3, 3.0) == "irregular"


def test_eta_values_and_admissibility():
    dom = G.moving_ball((1.0, 1.0), 0.4, 0.45, -0.5)
    prof = G.profile_for(dom)
    e = G.eta_sigma_h(dom, 0.1, 0.1, 0.2, 1 / 32, 1.0, profile=prof)
    assert e.min() >= 0 and e.max() <= 1
    assert e.max() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        G.eta_sigma_h(dom, 0.1, 0.39, 0.2, 1 / 32, 1.0, profile=prof)
    np.testing.assert_array_equal(G.eta_tilde([0.5, 1.5, 3.0]), [0.0, 0.5, 1.0])


def test_cutoff_properties_shrinking_ball():
    dom = G.moving_ball((1.0, 1.0), 0.4, 0.45, -0.5)
    prof = G.profile_for(dom)
    sigma = 0.1
    h = prof.modulus_inverse(sigma / 2)
    rep = G.cutoff_properties(dom, sigma, h, 1.0, 1 / 32, prof)
    assert (rep.vanish_violations, rep.monotone_violations, rep.lower_violations) == (0, 0, 0)
    late = G.cutoff_properties(dom, sigma, h, 1.0, 1 / 32, prof, t_min=0.2)
    assert late.lower_violations == 0
    with pytest.raises(ValueError):
        G.cutoff_properties(dom, sigma, h, 1.0, 1 / 32, prof, t_min=1.0)


def test_boundary_cell_fraction_scales_with_h():
    dom = G.moving_ball((1.0, 1.0), 0.4, 0.3, 0.2)
    a = G.boundary_cell_fraction(dom, 1 / 16, 8)
    b = G.boundary_cell_fraction(dom, 1 / 32, 8)
    assert 0 < b < a
