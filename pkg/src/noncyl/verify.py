"""Numerical certificates for space-time fields.

All time sums read a :class:`GridFunction` as piecewise constant on
(t_{k-1}, t_k].  The time-derivative terms are evaluated with the same
backward differences that the implicit scheme produces, paired against
the previous state; with this choice the inequalities hold for exact
minimizers up to the optimizer residual, and against continuum solutions
up to first-order quadrature error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import geometry
from .calculus import IntegrandSpec, boundary_term, power, _norm, _frob
from .fields import (GridFunction, cell_weights, grad_nodal, integrate, slice_power,
                     gradient_power, node_coords_for, landes_mollify, grad_adjoint)


@dataclass
class CheckResult:
    name: str
    lhs: float
    rhs: float
    slack: float
    ok: bool
    tol: float = 0.0


@dataclass
class DiagnosticsReport:
    checks: list = field(default_factory=list)

    def add(self, name, lhs, rhs, tol=0.0, slack=None) -> CheckResult:
        """Record lhs <= rhs.  ``slack`` may be supplied when it can be
        computed more accurately than rhs - lhs."""
        slack = float(rhs) - float(lhs) if slack is None else float(slack)
        c = CheckResult(name, float(lhs), float(rhs), slack, bool(slack >= -tol), float(tol))
        self.checks.append(c)
        return c

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def min_slack(self) -> float:
        return min((c.slack for c in self.checks), default=0.0)


@dataclass
class ComparisonMap:
    v: GridFunction
    name: str = "comparison"
    admissible: bool = True


def _slices(domain, u: GridFunction):
    T = domain.T
    times = np.minimum(u.times, T)
    return geometry.rasterize_stack(domain, times, u.h_x)


def make_comparison(values, u: GridFunction, domain, name="comparison", atol=0.0) -> ComparisonMap:
    """Wrap comparison values and record whether they equal the lateral
    datum off every slice."""
    v = u.with_values(values)
    ind = _slices(domain, u)
    off = ~ind
    dev = np.abs(v.values - u.u_star[None])[off]
    ok = bool(dev.size == 0 or dev.max() <= atol)
    return ComparisonMap(v, name, ok)


def _X(u):
    return node_coords_for(u)


def _f_int(spec, vals, h_x, X):
    return integrate(spec.f(X, vals, grad_nodal(vals, h_x)), h_x)


def _b_int(u, v, q, h_x):
    return integrate(boundary_term(u, v, q), h_x)


def _pair_int(dv, a, h_x):
    return integrate(np.sum(dv * a, axis=-1), h_x)


def _check_map(v):
    if isinstance(v, ComparisonMap):
        if not v.admissible:
            raise ValueError(f"comparison map {v.name!r} is not admissible")
        return v.v
    return v


def variational_terms(u: GridFunction, v, j: int, u_o, spec: IntegrandSpec) -> dict:
    """Terms of the variational inequality on (0, t_j)."""
    v = _check_map(v)
    if not 1 <= j <= u.K:
        raise IndexError("tau index out of range")
    X = _X(u)
    q = spec.q
    fu = u.h_t * sum(_f_int(spec, u.values[k], u.h_x, X) for k in range(1, j + 1))
    fv = u.h_t * sum(_f_int(spec, v.values[k], u.h_x, X) for k in range(1, j + 1))
    dt_term = sum(_pair_int(v.values[k] - v.values[k - 1],
                            power(v.values[k], q) - power(u.values[k - 1], q), u.h_x)
                  for k in range(1, j + 1))
    b_end = _b_int(u.values[j], v.values[j], q, u.h_x)
    b_start = _b_int(np.asarray(u_o, float), v.values[0], q, u.h_x)
    return {"f_u": fu, "f_v": fv, "dt": dt_term, "b_end": b_end, "b_start": b_start}


def variational_residual(u: GridFunction, v, j: int, u_o, spec: IntegrandSpec) -> float:
    """RHS - LHS of the variational inequality at tau = t_j."""
    t = variational_terms(u, v, j, u_o, spec)
    return t["f_v"] + t["dt"] - t["b_end"] + t["b_start"] - t["f_u"]


def localized_residual(u: GridFunction, v, jo: int, j: int, spec: IntegrandSpec) -> float:
    """RHS - LHS of the inequality localized to (t_jo, t_j)."""
    v = _check_map(v)
    if not 0 <= jo < j <= u.K:
        raise ValueError("need 0 <= tau_o < tau <= T on the grid")
    X = _X(u)
    q = spec.q
    lhs = u.h_t * sum(_f_int(spec, u.values[k], u.h_x, X) for k in range(jo + 1, j + 1))
    lhs += _b_int(u.values[j], v.values[j], q, u.h_x)
    rhs = u.h_t * sum(_f_int(spec, v.values[k], u.h_x, X) for k in range(jo + 1, j + 1))
    rhs += sum(_pair_int(v.values[k] - v.values[k - 1],
                         power(v.values[k], q) - power(u.values[k - 1], q), u.h_x)
               for k in range(jo + 1, j + 1))
    rhs += _b_int(u.values[jo], v.values[jo], q, u.h_x)
    return rhs - lhs


def trapezoid(a, b, c, d):
    """Piecewise linear cut-off: 0 before a, rising on [a, b], 1 on [b, c],
    falling on [c, d], 0 after d."""
    if not a < b <= c < d:
        raise ValueError("need a < b <= c < d")

    def zeta(t):
        t = np.asarray(t, float)
        return np.clip(np.minimum((t - a) / (b - a), (d - t) / (d - c)), 0.0, 1.0)

    zeta.support = (a, d)
    return zeta


def trapezoid_family(T: float, count: int = 6) -> list:
    """Trapezoids with varying plateaus and ramp widths inside (0, T)."""
    fam = []
    for i in range(count):
        a = T * (0.05 + 0.04 * i)
        d = T * (0.95 - 0.03 * i)
        ramp = T * (0.05 + 0.03 * (i % 3))
        fam.append(trapezoid(a, a + ramp, d - ramp, d))
    return fam


def int_by_parts_terms(u: GridFunction, v, zeta, spec: IntegrandSpec) -> tuple:
    """(lhs, pairing, zeta' term) of the integration-by-parts inequality.

    The pairing <d_t [u]^q, zeta (v - u)> is evaluated as
    -sum [u_k]^q . (phi_{k+1} - phi_k) with phi_k = zeta(t_k)(v_k - u_k)."""
    v = _check_map(v)
    a_sup, d_sup = getattr(zeta, "support", (None, None))
    z = zeta(u.times)
    if z[0] != 0 or z[-1] != 0 or (a_sup is not None and (a_sup <= 0 or d_sup >= u.times[-1])):
        raise ValueError("zeta must have compact support in (0, T)")
    if np.any(z < 0):
        raise ValueError("zeta must be nonnegative")
    q = spec.q
    h_x = u.h_x
    au = [power(u.values[k], q) for k in range(u.K + 1)]
    lhs = sum(z[k] * _pair_int(v.values[k] - v.values[k - 1],
                               power(v.values[k], q) - au[k - 1], h_x)
              for k in range(1, u.K + 1))
    phi = [z[k] * (v.values[k] - u.values[k]) for k in range(u.K + 1)]
    pairing = -sum(_pair_int(phi[k + 1] - phi[k], au[k], h_x) for k in range(u.K))
    zeta_term = sum((z[k + 1] - z[k]) * _b_int(u.values[k], v.values[k], q, h_x)
                    for k in range(u.K))
    return lhs, pairing, zeta_term


def int_by_parts_residual(u: GridFunction, v, zeta, spec: IntegrandSpec) -> float:
    """RHS - LHS of  int d_t v zeta ([v]^q - [u]^q) <= <d_t [u]^q, zeta (v-u)> - int zeta' b[u,v]."""
    lhs, pairing, zt = int_by_parts_terms(u, v, zeta, spec)
    return pairing - zt - lhs


# ---------------------------------------------------------------------------
# comparison maps

def smooth_bump(X, center, radius):
    r2 = np.sum((X - np.asarray(center)) ** 2, axis=-1) / radius ** 2
    out = np.zeros(r2.shape)
    inside = r2 < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def comparison_family(u: GridFunction, domain, spec: IntegrandSpec, u_o=None, exact=None,
                      sigma: float | None = None, seed: int = 0) -> dict:
    """The shipped comparison maps for a field u on ``domain``.

    lateral      v = u*
    mollified    v = u* + eta_sigma [u - u*]_h   (exponential time mollification)
    perturbed    v = u* + eta_sigma (u - u*) + s eta_sigma b(x) c(t), two signs
    bump         v = u* + A eta_sigma b(x) c(t)
    exact        the supplied exact solution, if any
    """
    rng = np.random.default_rng(seed)
    X = _X(u)
    sigma = 2 * u.h_x if sigma is None else sigma
    ind = _slices(domain, u)
    eta = np.stack([geometry.eta_tilde(geometry.distance_to_complement(ind[k], u.h_x) / sigma)
                    for k in range(u.K + 1)])[..., None]
    us = u.u_star[None]
    amp = max(float(np.max(np.abs(u.values))), 1e-3)
    T = u.times[-1]
    fam = {"lateral": np.broadcast_to(us, u.values.shape).copy()}
    w0 = u.values[0] if u_o is None else np.asarray(u_o, float)
    moll = landes_mollify(u.with_values(u.values - us), w0 - u.u_star, max(4 * u.h_t, 1e-12))
    fam["mollified"] = us + eta * moll.values
    box = np.array(domain.box)
    for name, sgn, sc in (("perturbed_plus", 1, 0.1), ("perturbed_minus", -1, 0.1),
                          ("bump", 1, 0.5)):
        c = box * rng.uniform(0.35, 0.65, size=len(box))
        rad = 0.3 * float(min(box))
        b = smooth_bump(X, c, rad)
        ct = 0.5 * (1 + np.cos(np.pi * u.times / T))[:, None] if T > 0 else 1.0
        shape = eta * (ct[(...,) + (None,) * (u.n)] if np.ndim(ct) else ct) * b[None, ..., None]
        base = us + eta * (u.values - us) if name.startswith("perturbed") else us
        fam[name] = base + sgn * sc * amp * shape
    if exact is not None:
        fam["exact"] = np.asarray(exact, float)
    out = {}
    for k, vals in fam.items():
        out[k] = make_comparison(vals, u, domain, k, atol=1e-12)
    return out


def energy_scale(u_o, u_star, spec: IntegrandSpec, T: float, h_x: float) -> float:
    X = np.stack(np.meshgrid(*[np.arange(m) * h_x for m in np.shape(u_star)[:-1]],
                             indexing="ij"), axis=-1)
    q = spec.q
    s = slice_power(u_o, q + 1, h_x) + slice_power(u_star, q + 1, h_x)
    s += T * _f_int(spec, np.asarray(u_star, float), h_x, X)
    return max(s, 1e-12)


def map_scale(v, spec: IntegrandSpec) -> float:
    """sup_k int |v_k|^{q+1} + sum_k h int f(v_k): the size of a comparison map,
    so tolerances stay meaningful when the data vanish."""
    v = _check_map(v)
    X = _X(v)
    vals = v.values
    sup = max(slice_power(vals[k], spec.q + 1, v.h_x) for k in range(v.K + 1))
    dis = sum(v.h_t * _f_int(spec, vals[k], v.h_x, X) for k in range(1, v.K + 1))
    return float(sup + dis)


def vi_tolerance(c_tol: float, h_x: float, h_t: float, scale: float) -> float:
    return c_tol * (h_x + h_t) * scale


def tau_indices(K: int, count: int = 16) -> list:
    idx = np.unique(np.round(np.linspace(1, K, count)).astype(int))
    return [int(i) for i in idx]


def certify_variational(u: GridFunction, family: dict, u_o, spec: IntegrandSpec, tol: float,
                        taus=None) -> DiagnosticsReport:
    rep = DiagnosticsReport()
    taus = tau_indices(u.K) if taus is None else taus
    for name, v in family.items():
        for j in taus:
            t = variational_terms(u, v, j, u_o, spec)
            lhs = t["f_u"]
            rhs = t["f_v"] + t["dt"] - t["b_end"] + t["b_start"]
            rep.add(f"vi[{name}, tau={j * u.h_t:.6g}]", lhs, rhs, tol)
    return rep


# ---------------------------------------------------------------------------
# dual norm of the time derivative

def bump_family(u: GridFunction, domain, count: int = 12, seed: int = 0) -> list:
    """Smooth space-time bumps supported inside E, each with a time profile
    vanishing at both ends of its window; returned unnormalized."""
    rng = np.random.default_rng(seed)
    X = _X(u)
    ind = _slices(domain, u)
    dist = np.stack([geometry.distance_to_complement(ind[k], u.h_x) for k in range(u.K + 1)])
    T = u.times[-1]
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        t1, t2 = np.sort(rng.uniform(0, T, 2))
        if t2 - t1 < 0.2 * T:
            continue
        k1, k2 = int(np.ceil(t1 / u.h_t)), int(np.floor(t2 / u.h_t))
        if k2 - k1 < 4:
            continue
        # centre: a node that stays deep inside E over the window
        d = dist[k1:k2 + 1].min(axis=0)
        if d.max() <= 3 * u.h_x:
            continue
        cand = np.argwhere(d > 3 * u.h_x)
        c_idx = cand[rng.integers(len(cand))]
        center = X[tuple(c_idx)]
        rad = float(min(d[tuple(c_idx)] - u.h_x, rng.uniform(0.1, 0.5) * min(domain.box)))
        if rad < 2 * u.h_x:
            continue
        b = smooth_bump(X, center, rad)
        freq = int(rng.integers(1, 4))
        s = np.clip((u.times - t1) / (t2 - t1), 0, 1)
        prof = np.sin(np.pi * s) ** 2 * np.cos(np.pi * (freq - 1) * s)
        phi = prof[:, None] * b.reshape(1, -1)
        phi = phi.reshape((u.K + 1,) + b.shape)[..., None] * np.ones(u.N)
        out.append(phi)
    return out


def vp_norm(phi, h_x, h_t, p) -> float:
    K = phi.shape[0] - 1
    tot = sum(slice_power(phi[k], p, h_x) + gradient_power(phi[k], p, h_x) for k in range(1, K + 1))
    return (h_t * tot) ** (1 / p)


def dual_pairing(u: GridFunction, phi, q: float) -> float:
    """-int int [u]^q d_t phi, exact for piecewise-constant u."""
    return -sum(_pair_int(power(u.values[k], q), phi[k] - phi[k - 1], u.h_x)
                for k in range(1, u.K + 1))


def _slice_dual_norm(g, free, h_x, p, tol=1e-10) -> float:
    """sup of sum w g.phi over phi vanishing off ``free`` with
    int |phi|^p + |D phi|^p = 1, via the convex problem
    min (1/p) int (|phi|^p + |D phi|^p) - int g.phi  (value -(1/p') s^{p'})."""
    w = cell_weights(g.shape[:-1], h_x)
    N = g.shape[-1]
    if not free.any() or not np.any(g[free]):
        return 0.0
    gw = g * w[..., None]

    def unpack(y):
        phi = np.zeros_like(g)
        phi[free] = y.reshape(-1, N)
        return phi

    def fun(y):
        phi = unpack(y)
        a = _norm(phi)
        D = grad_nodal(phi, h_x)
        b = _frob(D)
        J = np.sum(w * (a ** p + b ** p)) / p - np.sum(gw * phi)
        ga = (a ** (p - 2))[..., None] * phi * w[..., None]
        P = (b ** (p - 2))[..., None, None] * D * w[..., None, None]
        gb = np.stack([grad_adjoint(P[..., c, :], h_x) for c in range(N)], axis=-1)
        return J, (ga + gb - gw)[free].ravel()

    y0 = np.zeros(int(free.sum()) * N)
    res = optimize.minimize(fun, y0, jac=True, method="L-BFGS-B",
                            options={"maxiter": 20000, "maxcor": 30, "ftol": 0.0,
                                     "gtol": tol * float(np.max(np.abs(gw[free])))})
    phi = unpack(res.x)
    # sup = l(phi) / ||phi|| is a valid lower bound for any phi, and exact at the optimum
    nrm = (np.sum(w * (_norm(phi) ** p + _frob(grad_nodal(phi, h_x)) ** p))) ** (1 / p)
    return float(np.sum(gw * phi) / nrm) if nrm > 0 else 0.0


def dual_norm_exact(u: GridFunction, domain, spec: IntegrandSpec) -> float:
    """Discrete dual norm of d_t [u]^q against test fields that vanish at
    t = 0 and t = T and off the slices.  The pairing
    -sum int [u_k]^q (phi_k - phi_{k-1}) equals sum_k int ([u_{k+1}]^q - [u_k]^q) phi_k,
    and the norm sum_k h_t ||phi_k||^p_{W^{1,p}} splits, so the sup is
    (sum_k h_t (s_k / h_t)^{p'})^{1/p'} with s_k the slice dual norms."""
    p, q = spec.p, spec.q
    pc = spec.p_conj
    ind = _slices(domain, u)
    a = [power(u.values[k], q) for k in range(u.K + 1)]
    tot = 0.0
    for k in range(1, u.K):
        free = ind[k] & ind[k - 1]
        s = _slice_dual_norm(a[k + 1] - a[k], free, u.h_x, p)
        tot += u.h_t * (s / u.h_t) ** pc
    return tot ** (1 / pc)


def dual_norm_bound(u_o, u_star, spec: IntegrandSpec, T: float, h_x: float) -> float:
    X = np.stack(np.meshgrid(*[np.arange(m) * h_x for m in np.shape(u_star)[:-1]],
                             indexing="ij"), axis=-1)
    p, q = spec.p, spec.q
    w1p = slice_power(u_star, p, h_x) + gradient_power(u_star, p, h_x)
    G = integrate(spec.G(X), h_x)
    br = T * (w1p + G) + slice_power(u_o, q + 1, h_x) + slice_power(u_star, q + 1, h_x)
    return br ** (1 / spec.p_conj)


def dual_norm_estimate(u: GridFunction, family: list, spec: IntegrandSpec, u_o, T: float) -> tuple:
    """(sup over the family of |pairing| / ||phi||_{V^p}, bracket^{1/p'})."""
    if not family:
        raise ValueError("empty test family")
    best = 0.0
    for phi in family:
        nrm = vp_norm(phi, u.h_x, u.h_t, spec.p)
        if nrm > 0:
            best = max(best, abs(dual_pairing(u, phi, spec.q)) / nrm)
    return best, dual_norm_bound(u_o, u.u_star, spec, T, u.h_x)


# ---------------------------------------------------------------------------
# initial values and time continuity

def initial_attainment(u: GridFunction, u_o, probe, domain, q: float, ms=None) -> dict:
    """(1/h) int_0^h ||u(t) - u_o||^{q+1}_{L^{q+1}(K)} dt for h = m h_t.

    ``probe`` is a boolean node mask K that must lie inside E^0."""
    probe = np.asarray(probe, bool)
    ind0 = geometry.rasterize(domain, 0.0, u.h_x).indicator
    if (probe & ~ind0).any():
        raise ValueError("probe set not inside the initial slice")
    if ms is None:
        ms = [m for m in (u.K // 2 ** i for i in range(3, 12)) if m >= 1]
    w = cell_weights(u.shape, u.h_x) * probe
    per = [float(np.sum(w * _norm(u.values[k] - u_o) ** (q + 1))) for k in range(u.K + 1)]
    seq = {}
    for m in sorted(set(ms), reverse=True):
        seq[m * u.h_t] = float(np.mean(per[1:m + 1]))
    return seq


def attainment_verdict(seq: dict, tol: float) -> bool:
    vals = [seq[h] for h in sorted(seq, reverse=True)]
    mono = all(b <= a * (1 + 1e-12) + 1e-300 for a, b in zip(vals, vals[1:]))
    return bool(mono and vals[-1] <= tol)


def time_continuity_modulus(u: GridFunction, q: float, ms=(1, 2, 4, 8)) -> dict:
    """sup_k ||u_{k+m} - u_k||_{L^{q+1}} for delta = m h_t."""
    out = {}
    for m in ms:
        if m > u.K:
            continue
        out[m * u.h_t] = max(slice_power(u.values[k + m] - u.values[k], q + 1, u.h_x)
                             for k in range(u.K + 1 - m)) ** (1 / (q + 1))
    return out


def boundary_attainment(u: GridFunction, domain, q: float, min_nodes: int = 5) -> list:
    """Per time index, the normalized deviation from the lateral datum on
    the slice: (mean over E^t of |u - u*|^{q+1})^{1/(q+1)}; None when the
    slice has fewer than ``min_nodes`` nodes."""
    ind = _slices(domain, u)
    out = []
    for k in range(u.K + 1):
        m = ind[k]
        if m.sum() < min_nodes:
            out.append(None)
            continue
        dev = _norm(u.values[k] - u.u_star) ** (q + 1)
        out.append(float(dev[m].mean() ** (1 / (q + 1))))
    return out


def shrink_indicator(u: GridFunction, domain, q: float, min_nodes: int = 5) -> float:
    """Normalized deviation from the lateral datum at the last time whose
    slice still holds ``min_nodes`` nodes."""
    vals = [v for v in boundary_attainment(u, domain, q, min_nodes) if v is not None]
    return vals[-1] if vals else 0.0


# ---------------------------------------------------------------------------
# energy chain

def energy_constants(u_o, u_star, spec: IntegrandSpec, T: float, h_x: float) -> dict:
    """Right side of the energy chain and the derived bounds
    C1^p (gradient) and C2^{q+1} (sup of the L^{q+1} slice norms)."""
    X = np.stack(np.meshgrid(*[np.arange(m) * h_x for m in np.shape(u_star)[:-1]],
                             indexing="ij"), axis=-1)
    p, q, L, nu = spec.p, spec.q, spec.L, spec.nu
    us = np.asarray(u_star, float)
    lat = gradient_power(us, p, h_x) + slice_power(us, p, h_x) + integrate(spec.G(X), h_x)
    init = slice_power(u_o, q + 1, h_x)
    lq = slice_power(us, q + 1, h_x)
    f_star = _f_int(spec, us, h_x, X)
    data = 2 * q / (q + 1) * init + (2 ** q + 1) / (q + 1) * lq
    return {
        "lateral": lat, "initial": init, "lateral_lq1": lq, "f_star": f_star, "data": data,
        "C1p": (T * L * lat + data) / nu,
        "C2q1": 2 * (q + 1) / q * (T * L * lat + data),
    }


def energy_certificate(u: GridFunction, u_o, spec: IntegrandSpec, rtol: float = 1e-12) -> DiagnosticsReport:
    """Three links of the energy chain at every grid time:

    nu sum |Du|^p + c |u(tau)|^{q+1}  <=  sum f(u) + c |u(tau)|^{q+1}
                                      <=  tau f(u*) + data terms
                                      <=  tau L (|Du*|^p + |u*|^p + G) + data terms
    with c = q / (2(q+1)); each link is recorded separately."""
    q, p, nu = spec.q, spec.p, spec.nu
    X = _X(u)
    T = u.K * u.h_t
    consts = energy_constants(u_o, u.u_star, spec, T, u.h_x)
    us = u.u_star
    xs = grad_nodal(us, u.h_x)
    lat_gap = integrate(spec.L * (_frob(xs) ** p + _norm(us) ** p + spec.G(X))
                        - spec.f(X, us, xs), u.h_x)
    rep = DiagnosticsReport()
    grad_acc = f_acc = coer_gap = 0.0
    c = q / (2 * (q + 1))
    for j in range(0, u.K + 1):
        if j > 0:
            xi = grad_nodal(u.values[j], u.h_x)
            g = _frob(xi) ** p
            fv = spec.f(X, u.values[j], xi)
            grad_acc += u.h_t * integrate(g, u.h_x)
            f_acc += u.h_t * integrate(fv, u.h_x)
            # pointwise gap, exact zero when f = nu |xi|^p
            coer_gap += u.h_t * integrate(fv - nu * g, u.h_x)
        tau = j * u.h_t
        tail = c * slice_power(u.values[j], q + 1, u.h_x)
        lhs = nu * grad_acc + tail
        mid = f_acc + tail
        rhs_mid = tau * consts["f_star"] + consts["data"]
        rhs = tau * spec.L * consts["lateral"] + consts["data"]
        tol = rtol * max(abs(rhs), 1e-300)
        rep.add(f"coercivity[tau={tau:.6g}]", lhs, mid, tol, slack=coer_gap)
        rep.add(f"minimality[tau={tau:.6g}]", mid, rhs_mid, tol)
        rep.add(f"growth[tau={tau:.6g}]", rhs_mid, rhs, tol, slack=tau * lat_gap)
    return rep


def chain_slack(rep: DiagnosticsReport) -> float:
    """Overall slack of the chain: min over times of (outer rhs - lhs)."""
    by_tau = {}
    for ch in rep.checks:
        kind, tau = ch.name.split("[")
        by_tau.setdefault(tau, {})[kind] = ch
    out = np.inf
    for d in by_tau.values():
        out = min(out, d["growth"].rhs - d["coercivity"].lhs)
    return float(out)


# ---------------------------------------------------------------------------
# combined certificate

def map_tolerance(c_tol: float, u: GridFunction, v, u_o, spec: IntegrandSpec) -> float:
    """C_tol (h_x + h_t) times the data scale plus the size of the map."""
    scale = energy_scale(u_o, u.u_star, spec, u.K * u.h_t, u.h_x) + map_scale(v, spec)
    return vi_tolerance(c_tol, u.h_x, u.h_t, scale)


def certify_solution(u: GridFunction, domain, spec: IntegrandSpec, c_tol: float = 1.0,
                     exact=None, seed: int = 0, taus=None, zetas=None,
                     family: dict | None = None) -> DiagnosticsReport:
    """Energy chain, variational inequality against the shipped comparison
    family, and the integration-by-parts inequality for trapezoidal cut-offs.

    On cylinders the integration-by-parts check is two-sided: the reversed
    inequality must hold within the same tolerance."""
    u_o = u.values[0]
    rep = energy_certificate(u, u_o, spec)
    if family is None:
        family = comparison_family(u, domain, spec, u_o=u_o, exact=exact, seed=seed)
    taus = tau_indices(u.K) if taus is None else taus
    zetas = trapezoid_family(u.K * u.h_t) if zetas is None else zetas
    cyl = domain.kind == "cylinder"
    for name, v in family.items():
        tol = map_tolerance(c_tol, u, v, u_o, spec)
        for j in taus:
            t = variational_terms(u, v, j, u_o, spec)
            rep.add(f"vi[{name}, tau={j * u.h_t:.6g}]", t["f_u"],
                    t["f_v"] + t["dt"] - t["b_end"] + t["b_start"], tol)
        for i, z in enumerate(zetas):
            lhs, pairing, zt = int_by_parts_terms(u, v, z, spec)
            rep.add(f"ibp[{name}, zeta={i}]", lhs, pairing - zt, tol)
            if cyl:
                rep.add(f"ibp_reverse[{name}, zeta={i}]", pairing - zt, lhs, tol)
    return rep
