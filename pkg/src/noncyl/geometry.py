"""Time-sliced space-time domains on a Cartesian node grid.

A domain is a box Omega = [0, a_1] x ... x [0, a_n] together with a rule
deciding, for each time t in [0, T), which points belong to the open slice
E^t.  Slices are sampled at the grid nodes x = i * h_x; nodes on the faces
of the box never belong to a slice, so the lateral datum is imposed there
as well.  Distances to the complement are Euclidean distances to the set of
complement nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage, optimize


@dataclass(frozen=True)
class TimeSlicedDomain:
    box: tuple
    T: float
    slice_rule: Callable  # t -> (points (..., n) -> bool array (...))
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.box)

    def contains(self, t: float, points) -> np.ndarray:
        return np.asarray(self.slice_rule(t)(np.asarray(points, float)), bool)


@dataclass
class SliceGrid:
    indicator: np.ndarray
    dist: np.ndarray
    h_x: float
    t: float = float("nan")


def grid_shape(box, h_x: float) -> tuple:
    if h_x <= 0:
        raise ValueError("h_x must be positive")
    if len(box) == 0 or min(box) <= 0:
        raise ValueError("empty box")
    shape = []
    for a in box:
        m = a / h_x
        if abs(m - round(m)) > 1e-9 * max(1.0, m) or round(m) < 2:
            raise ValueError(f"h_x={h_x} does not divide box length {a}")
        shape.append(int(round(m)) + 1)
    return tuple(shape)


def node_coords(box, h_x: float) -> np.ndarray:
    """Array of node coordinates with shape (*grid_shape, n)."""
    axes = [np.arange(m) * h_x for m in grid_shape(box, h_x)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def interior_mask(shape) -> np.ndarray:
    mask = np.ones(shape, bool)
    for d, m in enumerate(shape):
        idx = [slice(None)] * len(shape)
        idx[d] = 0
        mask[tuple(idx)] = False
        idx[d] = m - 1
        mask[tuple(idx)] = False
    return mask


def distance_to_complement(indicator: np.ndarray, h_x: float) -> np.ndarray:
    """Exact Euclidean distance from every node to the nearest node outside
    the indicator set (zero on the complement)."""
    if not indicator.any():
        return np.zeros(indicator.shape)
    return ndimage.distance_transform_edt(indicator) * h_x


def rasterize(domain: TimeSlicedDomain, t: float, h_x: float) -> SliceGrid:
    if not 0 <= t < domain.T + 1e-12:
        raise ValueError("t outside [0, T)")
    shape = grid_shape(domain.box, h_x)
    ind = domain.contains(t, node_coords(domain.box, h_x)) & interior_mask(shape)
    return SliceGrid(ind, distance_to_complement(ind, h_x), h_x, t)


def rasterize_stack(domain: TimeSlicedDomain, times, h_x: float) -> np.ndarray:
    """Boolean indicators for several times, shape (len(times), *grid)."""
    X = node_coords(domain.box, h_x)
    inner = interior_mask(X.shape[:-1])
    return np.stack([domain.contains(min(t, domain.T), X) & inner for t in times])


# ---------------------------------------------------------------------------
# generators

def _center(box):
    return np.array([0.5 * a for a in box])


def cylinder(box=(1.0, 1.0), T: float = 1.0) -> TimeSlicedDomain:
    box = tuple(float(a) for a in box)

    def rule(t):
        def member(x):
            inside = np.ones(x.shape[:-1], bool)
            for d, a in enumerate(box):
                inside &= (x[..., d] > 0) & (x[..., d] < a)
            return inside
        return member

    return TimeSlicedDomain(box, T, rule, "cylinder", {})


def moving_ball(box, T: float, R0: float, rate: float, center=None) -> TimeSlicedDomain:
    """Ball of radius R0 + rate * t (clipped at zero) about ``center``."""
    box = tuple(float(a) for a in box)
    c = _center(box) if center is None else np.asarray(center, float)

    def rule(t):
        R = max(R0 + rate * t, 0.0)
        return lambda x: np.linalg.norm(x - c, axis=-1) < R

    kind = "monotone" if rate >= 0 else "shrinking_ball"
    return TimeSlicedDomain(box, T, rule, kind, {"R0": R0, "rate": rate, "center": c.tolist()})


def petrovskii(box, T: float, lam: float, K: float, center=None) -> TimeSlicedDomain:
    """|x - c| < K (T - t)^lam: the window (-1, 0) of the reference domain
    is shifted so that it ends at T."""
    box = tuple(float(a) for a in box)
    c = _center(box) if center is None else np.asarray(center, float)

    def rule(t):
        R = K * max(T - t, 0.0) ** lam
        return lambda x: np.linalg.norm(x - c, axis=-1) < R

    return TimeSlicedDomain(box, T, rule, "petrovskii",
                            {"lam": lam, "K": K, "center": c.tolist()})


def half_space(box, T: float, normal=(1.0, 0.0), offset: float = 0.5) -> TimeSlicedDomain:
    box = tuple(float(a) for a in box)
    nrm = np.asarray(normal, float)

    def rule(t):
        return lambda x: x @ nrm < offset

    return TimeSlicedDomain(box, T, rule, "custom", {"normal": list(normal), "offset": offset})


def make_domain(kind: str, box=(1.0, 1.0), T: float = 1.0, **kw) -> TimeSlicedDomain:
    if kind == "cylinder":
        return cylinder(box, T)
    if kind in ("expanding_ball", "monotone"):
        return moving_ball(box, T, kw.get("R0", 0.2), abs(kw.get("rate", 0.5)), kw.get("center"))
    if kind == "shrinking_ball":
        return moving_ball(box, T, kw.get("R0", 0.45), -abs(kw.get("rate", 0.3)), kw.get("center"))
    if kind == "petrovskii":
        return petrovskii(box, T, kw.get("lam", 0.5), kw.get("K", 1.0), kw.get("center"))
    raise KeyError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# measurements

def complementary_excess(domain: TimeSlicedDomain, s: float, t: float, h_x: float) -> float:
    """Largest distance from a complement node of E^t to the complement
    node set of E^s."""
    if s > t:
        raise ValueError("need s <= t")
    gs = rasterize(domain, s, h_x)
    gt = rasterize(domain, t, h_x)
    comp_t = ~gt.indicator
    return float(gs.dist[comp_t].max()) if comp_t.any() else 0.0


def inner_parallel_set(grid: SliceGrid, sigma: float) -> SliceGrid:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    ind = grid.dist > sigma
    return SliceGrid(ind, distance_to_complement(ind, grid.h_x), grid.h_x, grid.t)


def _ball_kernel(radius: float, h_x: float, n: int) -> np.ndarray:
    k = int(math.floor(radius / h_x))
    axes = np.meshgrid(*([np.arange(-k, k + 1)] * n), indexing="ij")
    r2 = sum(a.astype(float) ** 2 for a in axes)
    return (r2 * h_x ** 2 <= radius ** 2 + 1e-12).astype(float)


def boundary_nodes(indicator: np.ndarray) -> np.ndarray:
    """Slice nodes with at least one axis neighbour outside the slice."""
    comp = ~indicator
    near = np.zeros_like(indicator)
    for d in range(indicator.ndim):
        near |= np.roll(comp, 1, axis=d) | np.roll(comp, -1, axis=d)
    return indicator & near


@dataclass
class DensityVerdict:
    ok: bool
    worst_ratio: float
    per_radius: dict


def measure_density_check(domain: TimeSlicedDomain, t: float, delta: float,
                          radii: Sequence[float], h_x: float) -> DensityVerdict:
    """Complement volume fraction in balls about boundary nodes.

    Everything outside the box counts as complement, so the indicator is
    padded with complement nodes before the ball counts are taken."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    g = rasterize(domain, t, h_x)
    bnd = boundary_nodes(g.indicator)
    per = {}
    worst = 1.0
    if not bnd.any():
        return DensityVerdict(True, 1.0, per)
    for r in radii:
        ker = _ball_kernel(r, h_x, domain.n)
        pad = ker.shape[0] // 2
        comp = np.pad((~g.indicator).astype(float), pad, constant_values=1.0)
        counts = ndimage.convolve(comp, ker, mode="constant", cval=1.0)
        inner = tuple(slice(pad, pad + m) for m in g.indicator.shape)
        ratio = counts[inner][bnd] / ker.sum()
        per[float(r)] = float(ratio.min())
        worst = min(worst, per[float(r)])
    return DensityVerdict(worst >= delta, worst, per)


@dataclass
class GrowthProfile:
    """One-sided growth bound: a modulus omega(tau) or a path rho(t)."""

    variant: str              # "modulus" or "sobolev"
    omega: Callable | None = None
    rho: Callable | None = None
    r: float = float("inf")
    T: float = 1.0

    def bound(self, s: float, t: float) -> float:
        if self.variant == "modulus":
            return float(self.omega(t - s))
        return abs(float(self.rho(t)) - float(self.rho(s)))

    def modulus(self, tau: float) -> float:
        """omega itself, or for a path the sampled sup_t |rho(t) - rho(t - tau)|."""
        if self.variant == "modulus":
            return float(self.omega(tau))
        if tau <= 0:
            return 0.0
        ts = np.linspace(min(tau, self.T), self.T, 513)
        return float(max(abs(self.rho(a) - self.rho(a - tau)) for a in ts))

    def modulus_inverse(self, y: float) -> float:
        """Largest tau in [0, T] with modulus(tau) <= y, by bisection."""
        if self.modulus(self.T) <= y:
            return self.T
        lo, hi = 0.0, self.T
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.modulus(mid) <= y:
                lo = mid
            else:
                hi = mid
        return lo


def profile_for(domain: TimeSlicedDomain, n: int | None = None, p: float = 2.0,
                q: float = 1.0) -> GrowthProfile:
    """The natural growth profile of a built-in generator."""
    r = r_exponent(n or domain.n, p, q)
    if domain.kind == "cylinder" or (domain.kind == "monotone"):
        return GrowthProfile("modulus", omega=lambda tau: 0.0, r=r, T=domain.T)
    if domain.kind == "shrinking_ball":
        c = abs(domain.params["rate"])
        return GrowthProfile("sobolev", rho=lambda t: c * t, r=r, T=domain.T)
    if domain.kind == "petrovskii":
        K, lam, T = domain.params["K"], domain.params["lam"], domain.T
        return GrowthProfile("sobolev", rho=lambda t: K * max(T - t, 0.0) ** lam, r=r, T=T)
    raise ValueError("no built-in profile for this domain")


@dataclass
class GrowthVerdict:
    ok: bool
    margin: float          # max over pairs of excess - bound (<= slack passes)
    slack: float
    worst_pair: tuple


def growth_condition_check(domain: TimeSlicedDomain, profile: GrowthProfile, times,
                           h_x: float, variant: str | None = None,
                           slack: float | None = None) -> GrowthVerdict:
    if variant is not None and variant != profile.variant:
        raise ValueError(f"profile variant {profile.variant!r} does not match {variant!r}")
    slack = 2 * h_x if slack is None else slack
    times = sorted(float(t) for t in times)
    grids = [rasterize(domain, t, h_x) for t in times]
    worst, pair = -np.inf, (None, None)
    for i, gs in enumerate(grids):
        for j in range(i + 1, len(grids)):
            comp_t = ~grids[j].indicator
            e = float(gs.dist[comp_t].max()) if comp_t.any() else 0.0
            m = e - profile.bound(times[i], times[j])
            if m > worst:
                worst, pair = m, (times[i], times[j])
    if len(times) < 2:
        worst = 0.0
    return GrowthVerdict(bool(worst <= slack), float(worst), slack, pair)


def r_exponent(n: int, p: float, q: float) -> float:
    """Integrability exponent required of the growth path rho."""
    thr = (n + 1) * (q + 1) / (n + q + 1)
    if p < thr - 1e-14:
        raise ValueError(f"p={p} below the threshold {thr}")
    if p >= q + 1:
        return p / (p - 1)
    if abs(p - thr) <= 1e-14:
        return float("inf")
    return (p * (n + q + 1) - n * (q + 1)) / (p * (n + q + 1) - (n + 1) * (q + 1))


def classify_petrovskii(lam: float, p: float) -> str:
    """Regular-side iff lam > 1/p (the criterion is stated for p > 2)."""
    return "regular" if lam > 1.0 / p else "irregular"


# ---------------------------------------------------------------------------
# cut-offs

def eta_tilde(s):
    return np.clip(np.asarray(s, float) - 1.0, 0.0, 1.0)


def eta_sigma(grid: SliceGrid, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return eta_tilde(grid.dist / sigma)


def _eta_sigma_at(domain, sigma, s, h_x):
    if s < 0:
        return np.zeros(grid_shape(domain.box, h_x))
    return eta_sigma(rasterize(domain, min(s, domain.T), h_x), sigma)


def eta_sigma_h(domain: TimeSlicedDomain, sigma: float, h: float, t: float, h_x: float,
                q: float, samples: int = 8, profile: GrowthProfile | None = None) -> np.ndarray:
    """Backward time average of eta_sigma over (t - h, t), raised to 1/(q+1).

    The average treats eta_sigma as piecewise constant on the ``samples``
    sub-intervals of the window (value taken at the left end), with
    eta_sigma = 0 for negative times."""
    if sigma <= 0 or h <= 0:
        raise ValueError("sigma and h must be positive")
    if profile is not None and profile.modulus(h) > sigma / 2 + 1e-12:
        raise ValueError("h exceeds the admissible range for the growth profile")
    dt = h / samples
    acc = sum(_eta_sigma_at(domain, sigma, t - h + j * dt, h_x) for j in range(samples))
    return (acc / samples) ** (1.0 / (q + 1))


@dataclass
class CutoffReport:
    vanish_violations: int     # nonzero values on E^t minus E^{t, sigma/2}
    monotone_violations: int   # decrease on E^{t, 2 sigma}
    lower_violations: int      # time difference below the growth bound
    min_lower_margin: float


def cutoff_properties(domain: TimeSlicedDomain, sigma: float, h: float, q: float, h_x: float,
                      profile: GrowthProfile, samples: int = 8, t_max: float | None = None,
                      slack: float | None = None, t_min: float = 0.0) -> CutoffReport:
    """Check the three cut-off properties on the time grid
    t_k = t_min + k h / samples, t_k <= t_max.

    Discrete time differences of eta_{sigma,h}^{q+1} equal
    (eta_sigma(t) - eta_sigma(t - h)) / h exactly for this quadrature.
    ``slack`` (default 2 h_x) is the distance discretization allowance: the
    vanishing property is tested on nodes with dist <= sigma/2 - slack and
    the growth bound is widened by slack."""
    slack = 2 * h_x if slack is None else slack
    dt = h / samples
    t_max = domain.T - dt if t_max is None else t_max
    if t_min < 0 or t_min > t_max:
        raise ValueError("need 0 <= t_min <= t_max")
    K = int(math.floor((t_max - t_min) / dt + 1e-9))
    shape = grid_shape(domain.box, h_x)
    eta = np.zeros((K + samples + 1,) + shape)   # index j <-> time t_min + (j - samples) dt
    dists = {}
    for j in range(K + samples + 1):
        s = t_min + (j - samples) * dt
        if s < -1e-12:
            continue
        g = rasterize(domain, max(s, 0.0), h_x)
        if j >= samples:
            dists[j] = g.dist
        eta[j] = eta_sigma(g, sigma)
    csum = np.concatenate([np.zeros((1,) + shape), np.cumsum(eta, axis=0)])
    # power(k) = eta_{sigma,h}^{q+1} at t_k = mean of eta at t_{k-samples..k-1}
    def pw(k):
        j = k + samples
        return (csum[j] - csum[j - samples]) / samples

    vanish = mono = low = 0
    min_margin = np.inf
    for k in range(0, K + 1):
        j = k + samples
        d = dists[j]
        band = (d > 0) & (d <= sigma / 2 - slack)
        vanish += int(np.count_nonzero(pw(k)[band] > 0))
        if k < K:
            diff = (pw(k + 1) - pw(k)) / dt
            deep = d > 2 * sigma
            mono += int(np.count_nonzero(diff[deep] < -1e-12))
            tk = t_min + k * dt
            if tk - h < -1e-12:
                # eta_sigma vanishes before t = 0, so the difference is >= 0
                bound = 0.0
            else:
                bound = -(profile.bound(max(tk - h, 0.0), tk) + slack) / (sigma * h)
            marg = float(diff.min() - bound)
            min_margin = min(min_margin, marg)
            low += int(np.count_nonzero(diff < bound - 1e-12))
    return CutoffReport(vanish, mono, low, float(min_margin))


def boundary_cell_fraction(domain: TimeSlicedDomain, h_x: float, n_times: int) -> float:
    """Fraction of space-time cells whose corner memberships disagree."""
    times = np.linspace(0.0, domain.T, n_times + 1)
    times[-1] = domain.T * (1 - 1e-9)
    ind = rasterize_stack(domain, times, h_x)
    n = domain.n
    allc = ind.copy()
    anyc = ind.copy()
    for ax in range(n + 1):
        sl_a = [slice(None)] * (n + 1)
        sl_b = [slice(None)] * (n + 1)
        sl_a[ax] = slice(0, -1)
        sl_b[ax] = slice(1, None)
        allc = allc[tuple(sl_a)] & allc[tuple(sl_b)]
        anyc = anyc[tuple(sl_a)] | anyc[tuple(sl_b)]
    crossed = anyc & ~allc
    return float(crossed.mean())
