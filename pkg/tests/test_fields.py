import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from noncyl import calculus, fields as F, geometry

small = st.floats(-10, 10, allow_nan=False, allow_subnormal=False)


@given(st.lists(st.integers(2, 9), min_size=1, max_size=3), st.sampled_from([0.5, 0.25, 0.1]))
def test_cell_weights_sum_to_volume(shape, h):
    vol = np.prod([(m - 1) * h for m in shape])
    assert F.cell_weights(tuple(shape), h).sum() == pytest.approx(vol)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (6, 5, 2), elements=small), arrays(np.float64, (6, 5, 1), elements=small))
def test_grad_adjoint_identity(P, v):
    P = P.copy()
    P[-1, :, :] = 0.0
    P[:, -1, :] = 0.0
    h = 0.2
    lhs = np.sum(F.grad_adjoint(P, h) * v[..., 0])
    rhs = np.sum(P * F.grad_nodal(v, h)[..., 0, :])
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + np.abs(P).sum() * np.abs(v).max() / h))


def test_gradient_of_affine_is_exact():
    X = geometry.node_coords((1.0, 2.0), 0.25)
    v = (3 * X[..., 0] - 2 * X[..., 1] + 1)[..., None]
    g = F.grad_nodal(v, 0.25)
    np.testing.assert_allclose(g[..., 0, 0], 3.0)
    np.testing.assert_allclose(g[..., 0, 1], -2.0)


def test_integrate_and_norms_on_constant_field():
    vals = np.full((3, 5, 5), 2.0)
    u = F.scalar_field(vals, 0.25, 0.1)
    assert F.integrate(np.ones((5, 5)), 0.25) == pytest.approx(1.0)
    spec = calculus.prototype(2.0, 1.0)
    r = F.norms(u, spec)
    assert r.lq1_sup == pytest.approx(2.0)                 # (int 2^2)^(1/2)
    assert r.lp_space_time == pytest.approx((0.2 * 4) ** 0.5)
    assert r.w1p_seminorm == 0.0
    assert r.m == pytest.approx(2.0 * 4 / 2)


def test_gridfunction_validation_and_times():
    u = F.scalar_field(np.zeros((4, 3, 3)), 0.5, 0.25)
    assert (u.K, u.shape, u.n, u.N) == (3, (3, 3), 2, 1)
    np.testing.assert_allclose(u.times, [0, 0.25, 0.5, 0.75])
    with pytest.raises(ValueError):
        F.GridFunction(np.zeros((2, 3, 3, 1)), 0.5, 0.1, np.zeros((4, 4, 1)))
    with pytest.raises(IndexError):
        F.gradient(u, 7)


def test_constrain_to_Vt():
    dom = geometry.moving_ball((1.0, 1.0), 1.0, 0.3, 0.0)
    u = F.scalar_field(np.ones((2, 9, 9)), 0.125, 0.5, u_star=np.full((9, 9), -1.0))
    c = F.constrain_to_Vt(u, dom, 1)
    ind = geometry.rasterize(dom, 0.5, 0.125).indicator
    assert np.all(c.values[1][ind] == 1) and np.all(c.values[1][~ind] == -1)
    assert np.all(c.values[0] == 1)


def _const_field(c, K=10, dt=0.01):
    return F.scalar_field(np.full((K + 1, 5, 5), c), 0.25, dt)


def test_landes_constant_fixed_point():
    v = _const_field(3.0)
    w = F.landes_mollify(v, v.values[0], 0.05)
    np.testing.assert_allclose(w.values, 3.0)
    assert F.landes_error(v, v.values[0], 0.05) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        F.landes_mollify(v, v.values[0], 0.0)


@pytest.mark.parametrize("h", [0.002, 0.02, 0.5])
def test_landes_error_closed_form(h):
    # start at 0 toward constant c: error density c e^{-t/h}, so
    # ||w - v||_{L^1} = c h (1 - e^{-T/h}) |Omega|
    c, T = 2.0, 0.1
    v = _const_field(c)
    err = F.landes_error(v, np.zeros((5, 5, 1)), h, r=1.0)
    assert err == pytest.approx(c * h * (1 - np.exp(-T / h)), rel=1e-12)


def test_landes_ode_and_bound_random():
    rng = np.random.default_rng(3)
    v = F.scalar_field(rng.standard_normal((21, 6, 6)), 0.2, 0.01)
    v_o = rng.standard_normal((6, 6, 1))
    for h in (0.001, 0.01, 0.1):
        w = F.landes_mollify(v, v_o, h)
        assert F.landes_ode_residual(w, v, h) < 1e-12
        for r in (1.0, 2.0, 3.0):
            lhs, rhs = F.landes_bound(v, v_o, h, r, 20)
            assert lhs <= rhs * (1 + 1e-12)


def test_step_quadrature_integrates_exponential():
    s, w = F.step_quadrature(0.3, 0.01)
    assert w.sum() == pytest.approx(0.3)
    assert np.dot(w, np.exp(-s / 0.01)) == pytest.approx(0.01 * (1 - np.exp(-30)), rel=1e-13)


def test_steklov_forward():
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((9, 4, 4))
    u = F.scalar_field(vals, 1 / 3, 0.1)
    s = F.steklov_forward(u, 0.2)
    np.testing.assert_allclose(s.values[3, ..., 0], 0.5 * (vals[4] + vals[5]))
    np.testing.assert_allclose(s.values[8, ..., 0], 0.0)      # zero extension past T
    np.testing.assert_allclose(s.values[7, ..., 0], 0.5 * vals[8])
    with pytest.raises(ValueError):
        F.steklov_forward(u, 0.15)
    with pytest.raises(ValueError):
        F.steklov_forward(u, -0.1)


def test_hardy_quotient_zero_on_lateral_datum():
    dom = geometry.cylinder((1.0, 1.0), 1.0)
    us = np.random.default_rng(1).standard_normal((9, 9))
    u = F.scalar_field(np.stack([us, us]), 0.125, 0.5, u_star=us)
    assert F.hardy_quotient(u, dom, 1, 2.0) == (0.0, 0.0)
    X = geometry.node_coords((1.0, 1.0), 0.125)
    bump = np.sin(np.pi * X[..., 0]) * np.sin(np.pi * X[..., 1])
    u2 = F.scalar_field(np.stack([bump, bump]), 0.125, 0.5)
    hd, gd = F.hardy_quotient(u2, dom, 1, 2.0)
    assert 0 < hd < 10 * gd


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100.0), st.integers(0, 10_000))
def test_gagliardo_ratio_is_scale_invariant(lam, seed):
    """Both sides are homogeneous of degree m = p(n+q+1)/n in u."""
    spec = calculus.prototype(3.0, 0.5)
    vals = np.random.default_rng(seed).standard_normal((4, 6, 6))
    vals[:, 0, :] = vals[:, -1, :] = vals[:, :, 0] = vals[:, :, -1] = 0
    u = F.scalar_field(vals, 0.2, 0.1)
    a = F.gagliardo_check(u, spec)
    b = F.gagliardo_check(u.with_values(lam * u.values), spec)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-9)


def test_gagliardo_zero_field():
    spec = calculus.prototype(2.0, 1.0)
    r = F.gagliardo_check(F.scalar_field(np.zeros((3, 4, 4)), 1 / 3, 0.1), spec)
    assert r.ratio == 0.0 and r.ok
