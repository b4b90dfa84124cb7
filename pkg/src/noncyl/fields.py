"""Space-time grid functions, their norms and time regularizations.

A :class:`GridFunction` stores ``values[k]`` for k = 0..K on the node grid,
with components on the last axis.  In time it is read as the piecewise
constant function equal to ``values[k]`` on (t_{k-1}, t_k], where
t_k = k h_t; ``values[0]`` is the initial state.  Spatial integrals use the
cell rule: each node with all indices below the last one carries weight
h_x^n, so the weights sum to the box volume.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import geometry
from .calculus import IntegrandSpec, _norm, _frob


@dataclass
class GridFunction:
    values: np.ndarray          # (K+1, *shape, N)
    h_x: float
    h_t: float
    u_star: np.ndarray          # (*shape, N)
    mask: np.ndarray | None = None   # (K+1, *shape), True where pinned to u_star

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        self.u_star = np.asarray(self.u_star, float)
        if self.values.shape[1:] != self.u_star.shape:
            raise ValueError("values and u_star shapes disagree")

    @property
    def K(self) -> int:
        return self.values.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.values.shape[1:-1]

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def N(self) -> int:
        return self.values.shape[-1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.K + 1) * self.h_t

    def with_values(self, values) -> "GridFunction":
        return replace(self, values=np.asarray(values, float))


def scalar_field(values, h_x, h_t, u_star=None, mask=None) -> GridFunction:
    """Wrap a (K+1, *shape) scalar array as a GridFunction with N = 1."""
    v = np.asarray(values, float)[..., None]
    us = np.zeros(v.shape[1:]) if u_star is None else np.asarray(u_star, float).reshape(v.shape[1:])
    return GridFunction(v, h_x, h_t, us, mask)


# ---------------------------------------------------------------------------
# spatial calculus

def cell_weights(shape, h_x: float) -> np.ndarray:
    w = np.full(shape, h_x ** len(shape))
    for d in range(len(shape)):
        idx = [slice(None)] * len(shape)
        idx[d] = -1
        w[tuple(idx)] = 0.0
    return w


def grad_nodal(v: np.ndarray, h_x: float) -> np.ndarray:
    """Forward differences, one-sided backward at the last index of each
    axis.  v has shape (*shape, N); the result has shape (*shape, N, n)."""
    n = v.ndim - 1
    out = np.empty(v.shape + (n,))
    for d in range(n):
        diff = np.diff(v, axis=d) / h_x
        last = [slice(None)] * v.ndim
        last[d] = slice(-1, None)
        out[..., d] = np.concatenate([diff, diff[tuple(last)]], axis=d)
    return out


def grad_adjoint(P: np.ndarray, h_x: float) -> np.ndarray:
    """Adjoint of the forward difference for fields with zero weight on the
    last index: returns g with sum(g * v) = sum(P * grad(v)) when P vanishes
    on the last index of each axis."""
    n = P.shape[-1]
    g = np.zeros(P.shape[:-1])
    for d in range(n):
        Pd = P[..., d]
        head = [slice(None)] * (Pd.ndim)
        head[d] = slice(0, -1)
        Ph = Pd[tuple(head)] / h_x
        lo = [slice(None)] * Pd.ndim
        hi = [slice(None)] * Pd.ndim
        lo[d] = slice(0, -1)
        hi[d] = slice(1, None)
        g[tuple(lo)] -= Ph
        g[tuple(hi)] += Ph
    return g


def gradient(u: GridFunction, k: int) -> np.ndarray:
    if not 0 <= k <= u.K:
        raise IndexError("time index out of range")
    return grad_nodal(u.values[k], u.h_x)


def integrate(density: np.ndarray, h_x: float) -> float:
    return float(np.sum(cell_weights(density.shape, h_x) * density))


def slice_power(v: np.ndarray, r: float, h_x: float) -> float:
    """int |v|^r over the box for one time slice (no root taken)."""
    return integrate(_norm(v) ** r, h_x)


def gradient_power(v: np.ndarray, p: float, h_x: float) -> float:
    return integrate(_frob(grad_nodal(v, h_x)) ** p, h_x)


def node_coords_for(u: GridFunction) -> np.ndarray:
    axes = [np.arange(m) * u.h_x for m in u.shape]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def energy_density(spec: IntegrandSpec, v: np.ndarray, h_x: float, X: np.ndarray) -> np.ndarray:
    return spec.f(X, v, grad_nodal(v, h_x))


def energy(spec: IntegrandSpec, v: np.ndarray, h_x: float, X: np.ndarray) -> float:
    return integrate(energy_density(spec, v, h_x, X), h_x)


@dataclass
class NormReport:
    lp_space_time: float
    lq1_sup: float
    w1p_seminorm: float
    m: float
    lm_space_time: float


def gagliardo_exponent(n: int, p: float, q: float) -> float:
    return p * (n + q + 1) / n


def norms(u: GridFunction, spec: IntegrandSpec) -> NormReport:
    p, q = spec.p, spec.q
    ks = range(1, u.K + 1)
    lp = sum(slice_power(u.values[k], p, u.h_x) for k in ks) * u.h_t
    sup = max(slice_power(u.values[k], q + 1, u.h_x) for k in range(u.K + 1))
    w1p = sum(gradient_power(u.values[k], p, u.h_x) for k in ks) * u.h_t
    m = gagliardo_exponent(u.n, p, q)
    lm = sum(slice_power(u.values[k], m, u.h_x) for k in ks) * u.h_t
    return NormReport(lp ** (1 / p), sup ** (1 / (q + 1)), w1p ** (1 / p), m, lm ** (1 / m))


def constrain_to_Vt(u: GridFunction, domain: geometry.TimeSlicedDomain, k: int) -> GridFunction:
    """Replace values outside E^{t_k} by the lateral datum."""
    ind = geometry.rasterize(domain, min(k * u.h_t, domain.T * (1 - 1e-12)), u.h_x).indicator
    vals = u.values.copy()
    vals[k] = np.where(ind[..., None], vals[k], u.u_star)
    return u.with_values(vals)


# ---------------------------------------------------------------------------
# time regularizations

def landes_mollify(v: GridFunction, v_o: np.ndarray, h: float) -> GridFunction:
    """Exponential time mollification started from v_o.

    Each step integrates the linear ODE w' = -(w - v)/h exactly for the
    piecewise-constant v: w_k = e^{-dt/h} w_{k-1} + (1 - e^{-dt/h}) v_k."""
    if h <= 0:
        raise ValueError("h must be positive")
    a = np.exp(-v.h_t / h)
    out = np.empty_like(v.values)
    out[0] = v_o
    for k in range(1, v.K + 1):
        out[k] = a * out[k - 1] + (1 - a) * v.values[k]
    return v.with_values(out)


def landes_profile(w_prev, v_k, h: float, s):
    """Mollified values at offsets s in [0, dt] inside one step."""
    e = np.exp(-np.asarray(s, float) / h)
    return v_k[None] + (w_prev - v_k)[None] * e.reshape((-1,) + (1,) * np.ndim(v_k))


def step_quadrature(dt: float, h: float, nodes: int = 16) -> tuple:
    """Composite Gauss-Legendre rule on [0, dt] with panels no wider than h,
    accurate for the exponential profiles e^{-s/h}."""
    panels = max(1, int(np.ceil(dt / h)))
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    width = dt / panels
    s = (np.arange(panels)[:, None] + 0.5 * (xg[None] + 1)) * width
    return s.ravel(), np.tile(0.5 * width * wg, panels)


def landes_ode_residual(w: GridFunction, v: GridFunction, h: float) -> float:
    """Relative residual of the integrated ODE over every step:
    w_k - w_{k-1} = -(1/h) int_{t_{k-1}}^{t_k} (w - v) ds, where the integral
    of w over the step is evaluated by composite Gauss-Legendre quadrature
    of the in-step exponential profile."""
    s, ws = step_quadrature(w.h_t, h)
    worst = 0.0
    scale = max(np.max(np.abs(w.values)), np.max(np.abs(v.values)), 1e-300)
    for k in range(1, w.K + 1):
        prof = landes_profile(w.values[k - 1], v.values[k], h, s)
        integral = np.tensordot(ws, prof - v.values[k][None], axes=(0, 0))
        res = w.values[k] - w.values[k - 1] + integral / h
        worst = max(worst, float(np.max(np.abs(res))) / scale)
    return worst


def _stack_power(prof, r, h_x):
    """int |prof_i|^r for every leading index i."""
    w = cell_weights(prof.shape[1:-1], h_x)
    return np.sum((_norm(prof) ** r) * w[None], axis=tuple(range(1, prof.ndim - 1)))


def landes_time_norm(w: GridFunction, v: GridFunction, h: float, r: float, K_end: int,
                     nodes: int = 8) -> float:
    """L^r(0, t_{K_end}; L^r(Omega)) norm of the mollification, integrating
    the in-step exponential profile with composite Gauss-Legendre nodes."""
    s, ws = step_quadrature(w.h_t, h, nodes)
    total = 0.0
    for k in range(1, K_end + 1):
        prof = landes_profile(w.values[k - 1], v.values[k], h, s)
        total += float(np.dot(ws, _stack_power(prof, r, w.h_x)))
    return total ** (1 / r)


def piecewise_time_norm(v: GridFunction, r: float, K_end: int) -> float:
    return (v.h_t * sum(slice_power(v.values[k], r, v.h_x) for k in range(1, K_end + 1))) ** (1 / r)


def landes_bound(v: GridFunction, v_o: np.ndarray, h: float, r: float, K_end: int) -> tuple:
    """Both sides of the L^r bound for the mollification on (0, t_o)."""
    w = landes_mollify(v, v_o, h)
    t_o = K_end * v.h_t
    lhs = landes_time_norm(w, v, h, r, K_end)
    vo = slice_power(np.asarray(v_o, float), r, v.h_x) ** (1 / r)
    rhs = piecewise_time_norm(v, r, K_end) + (h / r * (1 - np.exp(-t_o * r / h))) ** (1 / r) * vo
    return lhs, rhs


def landes_error(v: GridFunction, v_o: np.ndarray, h: float, r: float = 1.0) -> float:
    """|| [v]_h - v ||_{L^r(0, T; L^r)} with in-step exact profiles."""
    w = landes_mollify(v, v_o, h)
    s, ws = step_quadrature(v.h_t, h)
    total = 0.0
    for k in range(1, v.K + 1):
        prof = landes_profile(w.values[k - 1], v.values[k], h, s) - v.values[k][None]
        total += float(np.dot(ws, _stack_power(prof, r, v.h_x)))
    return total ** (1 / r)


def steklov_forward(v: GridFunction, h: float) -> GridFunction:
    """Forward time average over (t, t+h), v extended by zero beyond T.

    h must be a multiple of h_t; out[k] = mean(values[k+1 .. k+m])."""
    if h <= 0:
        raise ValueError("h must be positive")
    m = int(round(h / v.h_t))
    if m < 1 or abs(m * v.h_t - h) > 1e-9 * h:
        raise ValueError("h must be a positive multiple of h_t")
    ext = np.concatenate([v.values, np.zeros((m,) + v.values.shape[1:])])
    csum = np.concatenate([np.zeros((1,) + ext.shape[1:]), np.cumsum(ext, axis=0)])
    k = np.arange(v.K + 1)
    out = (csum[k + m + 1] - csum[k + 1]) / m
    return v.with_values(out)


# ---------------------------------------------------------------------------
# Hardy and Gagliardo-Nirenberg diagnostics

def hardy_quotient(u: GridFunction, domain: geometry.TimeSlicedDomain, k: int, p: float) -> tuple:
    """(int_{E^t} |(u - u*)/dist|^p, int |D(u - u*)|^p) at time index k.

    Distances below h_x/2 are raised to h_x/2."""
    g = geometry.rasterize(domain, min(k * u.h_t, domain.T * (1 - 1e-12)), u.h_x)
    w = u.values[k] - u.u_star
    d = np.maximum(g.dist, 0.5 * u.h_x)
    dens = np.where(g.indicator, (_norm(w) / d) ** p, 0.0)
    return integrate(dens, u.h_x), gradient_power(w, p, u.h_x)


@dataclass
class GagliardoReport:
    lhs: float          # int int |u|^m
    core: float         # (sup_t int |u|^{q+1})^{p/n} * int int |Du|^p
    ratio: float
    ok: bool


def gagliardo_check(u: GridFunction, spec: IntegrandSpec, C: float = 1.0) -> GagliardoReport:
    p, q, n = spec.p, spec.q, u.n
    m = gagliardo_exponent(n, p, q)
    ks = range(1, u.K + 1)
    lhs = u.h_t * sum(slice_power(u.values[k], m, u.h_x) for k in ks)
    sup = max(slice_power(u.values[k], q + 1, u.h_x) for k in range(u.K + 1))
    dp = u.h_t * sum(gradient_power(u.values[k], p, u.h_x) for k in ks)
    core = sup ** (p / n) * dp
    ratio = lhs / core if core > 0 else (0.0 if lhs == 0 else np.inf)
    return GagliardoReport(lhs, core, ratio, bool(lhs <= C * core + 1e-300))
