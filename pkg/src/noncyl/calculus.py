"""Pointwise calculus: the power map, the boundary term, integrands and
the elementary inequalities relating them.

All vector-valued inputs carry their components on the last axis, so an
array of shape ``(..., N)`` is a field of ``N``-vectors.  Zero-dimensional
inputs are treated as scalars.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _norm(u):
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        return np.abs(u)
    return np.linalg.norm(u, axis=-1)


def _dot(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 0 and b.ndim == 0:
        return a * b
    return np.sum(a * b, axis=-1)


def _safe_pow(r, e):
    """r**e with the convention 0**e = 0 for any exponent."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = r[pos] ** e
    return out


def power(u, alpha: float):
    """Signed power |u|^(alpha-1) u, keeping the direction of ``u``."""
    if alpha <= 0:
        raise ValueError("exponent must be positive")
    u = np.asarray(u, dtype=float)
    r = _norm(u)
    scale = _safe_pow(r, alpha - 1.0)
    if u.ndim == 0:
        return scale * u
    return scale[..., None] * u


def boundary_term(u, v, q: float):
    """|v|^(q+1)/(q+1) + q|u|^(q+1)/(q+1) - [u]^q . v  (nonnegative)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ru = _norm(u)
    rv = _norm(v)
    return (rv ** (q + 1) + q * ru ** (q + 1)) / (q + 1) - _dot(power(u, q), v)


def monotone_pairing(u, v, q: float):
    """([v]^q - [u]^q) . (v - u)."""
    return _dot(power(v, q) - power(u, q), np.asarray(v, float) - np.asarray(u, float))


# ---------------------------------------------------------------------------
# integrands

@dataclass
class IntegrandSpec:
    """Integrand f(x, u, xi) with its partial derivatives and growth data.

    ``f`` maps arrays x (..., n), u (..., N), xi (..., N, n) to (...);
    ``dxi_f`` returns (..., N, n) and ``du_f`` returns (..., N).
    ``G`` maps x (..., n) to a nonnegative array (...).
    """

    p: float
    q: float
    nu: float
    L: float
    f: Callable
    dxi_f: Callable
    du_f: Callable
    G: Callable = field(default=lambda x: np.zeros(np.shape(x)[:-1]))
    N: int = 1
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        if self.q <= 0:
            raise ValueError("q must be positive")
        if not 0 < self.nu <= self.L:
            raise ValueError("need 0 < nu <= L")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)


def _frob(xi):
    return np.sqrt(np.sum(np.asarray(xi, float) ** 2, axis=(-2, -1)))


def prototype(p: float, q: float, weight: float = 1.0, N: int = 1) -> IntegrandSpec:
    """weight * |xi|^p."""

    def f(x, u, xi):
        return weight * _frob(xi) ** p

    def dxi(x, u, xi):
        r = _frob(xi)
        return (weight * p * _safe_pow(r, p - 2.0))[..., None, None] * xi

    def du(x, u, xi):
        return np.zeros(np.shape(u))

    return IntegrandSpec(p, q, weight, weight, f, dxi, du, N=N, name="prototype",
                         params={"weight": weight})


def regularized(p: float, q: float, delta: float, N: int = 1) -> IntegrandSpec:
    """(delta^2 + |xi|^2)^(p/2); G = delta^p."""

    def f(x, u, xi):
        return (delta ** 2 + _frob(xi) ** 2) ** (p / 2)

    def dxi(x, u, xi):
        s = (delta ** 2 + _frob(xi) ** 2) ** (p / 2 - 1)
        return (p * s)[..., None, None] * xi

    def du(x, u, xi):
        return np.zeros(np.shape(u))

    L = max(1.0, 2.0 ** (p / 2 - 1))
    return IntegrandSpec(p, q, 1.0, L, f, dxi, du,
                         G=lambda x: np.full(np.shape(x)[:-1], delta ** p),
                         N=N, name="regularized", params={"delta": delta})


def with_lower_order(p: float, q: float, mu: float, g: float = 0.0,
                     N: int = 1) -> IntegrandSpec:
    """|xi|^p + mu |u|^p + g, a simple integrand with u-dependence."""

    def f(x, u, xi):
        return _frob(xi) ** p + mu * _norm(u) ** p + g

    def dxi(x, u, xi):
        r = _frob(xi)
        return (p * _safe_pow(r, p - 2.0))[..., None, None] * xi

    def du(x, u, xi):
        return mu * p * power(u, p - 1.0)

    return IntegrandSpec(p, q, 1.0, max(1.0, mu), f, dxi, du,
                         G=lambda x: np.full(np.shape(x)[:-1], float(g)),
                         N=N, name="lower_order", params={"mu": mu, "g": g})


INTEGRANDS = {
    "prototype": lambda p, q, **kw: prototype(p, q, kw.get("weight", 1.0), kw.get("N", 1)),
    "regularized": lambda p, q, **kw: regularized(p, q, kw.get("delta", 0.1), kw.get("N", 1)),
    "lower_order": lambda p, q, **kw: with_lower_order(p, q, kw.get("mu", 1.0), kw.get("g", 0.0),
                                                      kw.get("N", 1)),
}


def make_integrand(name: str, p: float, q: float, **kw) -> IntegrandSpec:
    if name not in INTEGRANDS:
        raise KeyError(f"unknown integrand {name!r}")
    return INTEGRANDS[name](p, q, **kw)


# ---------------------------------------------------------------------------
# growth, Lipschitz and convexity spot checks

@dataclass
class Samples:
    x: np.ndarray
    u: np.ndarray
    xi: np.ndarray


def draw_samples(rng, count: int, n: int, N: int = 1, box: float = 3.0) -> Samples:
    """Random arguments in a box; magnitudes are spread log-uniformly."""
    x = rng.uniform(0.0, 1.0, size=(count, n))
    mag_u = box * 10.0 ** rng.uniform(-3, 0, size=(count, 1))
    mag_xi = box * 10.0 ** rng.uniform(-3, 0, size=(count, 1, 1))
    u = mag_u * rng.standard_normal((count, N))
    xi = mag_xi * rng.standard_normal((count, N, n))
    return Samples(x, u, xi)


@dataclass
class GrowthVerdict:
    ok: bool
    lower_violations: int
    upper_violations: int
    lipschitz_constant: float
    worst: dict


def lipschitz_quotients(spec: IntegrandSpec, a: Samples, b: Samples) -> np.ndarray:
    """Quotients of the local Lipschitz condition for paired samples at the
    same point x = a.x."""
    fa = spec.f(a.x, a.u, a.xi)
    fb = spec.f(a.x, b.u, b.xi)
    du = _norm(a.u - b.u)
    dxi = _frob(a.xi - b.xi)
    base = (_frob(a.xi) + _frob(b.xi) + _norm(a.u) + _norm(b.u)) ** (spec.p - 1)
    weight = base + spec.G(a.x) ** (1.0 / spec.p_conj)
    denom = weight * (du + dxi)
    ok = denom > 0
    out = np.zeros_like(fa)
    out[ok] = np.abs(fa - fb)[ok] / denom[ok]
    return out


def integrand_growth_check(spec: IntegrandSpec, samples: Samples,
                           partner: Samples | None = None, rtol: float = 1e-12) -> GrowthVerdict:
    """Check nu|xi|^p <= f <= L(|xi|^p + |u|^p + G) on every sample and fit the
    Lipschitz constant on (sample, partner) pairs."""
    x, u, xi = samples.x, samples.u, samples.xi
    fv = spec.f(x, u, xi)
    r = _frob(xi) ** spec.p
    lower = spec.nu * r
    upper = spec.L * (r + _norm(u) ** spec.p + spec.G(x))
    lo_bad = fv < lower * (1 - rtol)
    hi_bad = fv > upper * (1 + rtol)
    worst = {}
    if lo_bad.any():
        i = int(np.argmax(lower - fv))
        worst["lower"] = {"u": u[i].tolist(), "xi": xi[i].tolist(), "f": float(fv[i])}
    if hi_bad.any():
        i = int(np.argmax(fv - upper))
        worst["upper"] = {"u": u[i].tolist(), "xi": xi[i].tolist(), "f": float(fv[i])}
    if partner is None:
        partner = Samples(x, u[::-1].copy(), xi[::-1].copy())
    c = float(np.max(lipschitz_quotients(spec, samples, partner)))
    return GrowthVerdict(not (lo_bad.any() or hi_bad.any()), int(lo_bad.sum()),
                         int(hi_bad.sum()), c, worst)


def midpoint_convexity_violations(spec: IntegrandSpec, a: Samples, b: Samples,
                                  rtol: float = 1e-12) -> int:
    """Count pairs with f(midpoint) > (f(a) + f(b))/2."""
    mid = spec.f(a.x, 0.5 * (a.u + b.u), 0.5 * (a.xi + b.xi))
    avg = 0.5 * (spec.f(a.x, a.u, a.xi) + spec.f(a.x, b.u, b.xi))
    return int(np.sum(mid > avg + rtol * np.abs(avg)))


# ---------------------------------------------------------------------------
# elementary inequalities

@dataclass
class InequalityRecord:
    """Both sides of the pointwise inequalities for arrays of pairs.

    Ratios are 0-homogeneous; ``nan`` marks pairs where a ratio is 0/0.
    """

    b_uv: np.ndarray
    b_vu: np.ndarray
    pairing: np.ndarray
    ratio_equivalence: np.ndarray   # (|u|+|v|)^(a-1)|v-u| / |[v]^a-[u]^a|
    ratio_power_gap: np.ndarray     # |v-u|^a / |[v]^a-[u]^a|  (a > 1 only)
    ratio_half_power: np.ndarray    # |u-v|^(q+1) / ((|u|^h+|v|^h)|[u]^h-[v]^h|)
    ratio_boundary: np.ndarray      # |[u]^h-[v]^h|^2 / b[u,v]


def _ratio(num, den):
    num = np.asarray(num, float)
    den = np.asarray(den, float)
    out = np.full(np.broadcast(num, den).shape, np.nan)
    ok = den > 0
    out[ok] = (num * np.ones_like(den))[ok] / den[ok]
    return out


def pair_inequalities(u, v, q: float) -> InequalityRecord:
    """Evaluate all sides of the power-map and boundary-term inequalities.

    The exponent alpha of the two power-map comparisons is taken equal to q,
    and h = (q+1)/2.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    a = q
    h = 0.5 * (q + 1)
    ru, rv = _norm(u), _norm(v)
    dv = _norm(v - u)
    jump_a = _norm(power(v, a) - power(u, a))
    jump_h = _norm(power(u, h) - power(v, h))
    b_uv = boundary_term(u, v, q)
    b_vu = boundary_term(v, u, q)
    pairing = monotone_pairing(u, v, q)
    r_eq = _ratio((ru + rv) ** (a - 1) * dv, jump_a)
    r_gap = _ratio(dv ** a, jump_a) if a > 1 else np.full(np.shape(dv), np.nan)
    r_half = _ratio(dv ** (q + 1), (ru ** h + rv ** h) * jump_h)
    r_bd = _ratio(jump_h ** 2, b_uv)
    return InequalityRecord(b_uv, b_vu, pairing, r_eq, r_gap, r_half, r_bd)


def pair_constants(rec: InequalityRecord) -> dict:
    """Smallest constants compatible with the record.

    The two-sided equivalence uses max(ratio, 1/ratio)."""
    def mx(r):
        r = r[np.isfinite(r)]
        return float(np.max(r)) if r.size else float("nan")

    r_eq = rec.ratio_equivalence[np.isfinite(rec.ratio_equivalence)]
    r_eq = r_eq[r_eq > 0]
    return {
        "equivalence": float(np.max(np.maximum(r_eq, 1.0 / r_eq))) if r_eq.size else float("nan"),
        "power_gap": mx(rec.ratio_power_gap),
        "half_power": mx(rec.ratio_half_power),
        "boundary": mx(rec.ratio_boundary),
    }


def collinear_scan(q: float, s) -> InequalityRecord:
    """Records for the collinear pairs u = e1, v = s e1.

    By rotation invariance and 0-homogeneity every scalar pair reduces to
    this family (with s in [-1, 1] after swapping and scaling)."""
    s = np.asarray(s, float)
    u = np.zeros(s.shape + (1,))
    u[..., 0] = 1.0
    v = s[..., None] * u
    return pair_inequalities(u, v, q)


def fit_pair_constants(q: float, rng, n_scan: int = 100_000, n_random: int = 100_000,
                        N: int = 3) -> dict:
    """Fit the inequality constants on a seeded collinear scan, then take the
    maximum with a seeded random N-dimensional suite."""
    s = np.concatenate([rng.uniform(-1.0, 1.0, n_scan), [-1.0, 0.0]])
    scan = pair_constants(collinear_scan(q, s))
    u = rng.standard_normal((n_random, N))
    v = rng.standard_normal((n_random, N)) * 10.0 ** rng.uniform(-2, 2, (n_random, 1))
    rand = pair_constants(pair_inequalities(u, v, q))
    out = {}
    for k in scan:
        vals = [c for c in (scan[k], rand[k]) if np.isfinite(c)]
        out[k] = max(vals) if vals else float("nan")
    out["scan"] = scan
    out["random"] = rand
    return out
