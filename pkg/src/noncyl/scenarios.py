"""Built-in scenarios: domain, integrand, data and, where known, the exact
solution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry
from .calculus import IntegrandSpec, prototype, with_lower_order


@dataclass
class Scenario:
    name: str
    domain: geometry.TimeSlicedDomain
    spec: IntegrandSpec
    u_o: Callable                     # X -> (*shape, N)
    u_star: Callable                  # X -> (*shape, N)
    exact: Callable | None = None     # (X, t) -> (*shape, N)
    base_cells: int = 16              # cells along the unit length at level 0
    base_ell: int = 8                 # slabs at level 0
    inner_steps: int = 1
    eps: float = 0.0
    notes: str = ""

    def h_x(self, level: int = 0) -> float:
        return 1.0 / (self.base_cells * 2 ** level)

    def ell(self, level: int = 0) -> int:
        return self.base_ell * 2 ** level

    def data(self, h_x: float):
        X = geometry.node_coords(self.domain.box, h_x)
        return X, np.asarray(self.u_o(X), float), np.asarray(self.u_star(X), float)

    def exact_values(self, h_x: float, times):
        X = geometry.node_coords(self.domain.box, h_x)
        return np.stack([self.exact(X, t) for t in times])


def _zeros(X):
    return np.zeros(X.shape[:-1] + (1,))


def heat(T: float = 0.05) -> Scenario:
    """u_t = div(Du) from f = |xi|^2 / 2 on the unit square, zero datum."""
    dom = geometry.cylinder((1.0, 1.0), T)

    def u_o(X):
        return (np.sin(np.pi * X[..., 0]) * np.sin(np.pi * X[..., 1]))[..., None]

    def exact(X, t):
        return u_o(X) * np.exp(-2 * np.pi ** 2 * t)

    return Scenario("heat", dom, prototype(2.0, 1.0, 0.5), u_o, _zeros, exact,
                    base_cells=16, base_ell=8)


def zero(T: float = 0.05) -> Scenario:
    dom = geometry.cylinder((1.0, 1.0), T)
    return Scenario("zero", dom, prototype(2.0, 1.0, 0.5), _zeros, _zeros,
                    lambda X, t: _zeros(X), base_cells=8, base_ell=4)


def barenblatt(X, t, center, C):
    """Porous-medium profile u = w^2 with w_t = Lap(w^2) in two dimensions:
    w = t^{-1/2} (C - |x - c|^2 / (16 t^{1/2}))_+."""
    r2 = np.sum((X - np.asarray(center)) ** 2, axis=-1)
    w = t ** -0.5 * np.maximum(C - r2 / (16 * np.sqrt(t)), 0.0)
    return (w ** 2)[..., None]


def porous(T: float = 0.02, t0: float = 0.01, C: float = 0.2, side: float = 2.0) -> Scenario:
    """[u]^{1/2} flux-balanced against f = |xi|^2 / 2, i.e. w = u^{1/2}
    solves w_t = Lap(w^2); the Barenblatt profile started at time t0."""
    dom = geometry.cylinder((side, side), T)
    c = (0.5 * side, 0.5 * side)
    return Scenario("porous", dom, prototype(2.0, 0.5, 0.5),
                    lambda X: barenblatt(X, t0, c, C), _zeros,
                    lambda X, t: barenblatt(X, t0 + t, c, C),
                    base_cells=8, base_ell=4, inner_steps=2, eps=1e-4,
                    notes=f"t0={t0} C={C}")


def p_harmonic(T: float = 0.05, p: float = 3.0) -> Scenario:
    """Affine lateral datum: a time-constant p-harmonic solution."""
    dom = geometry.cylinder((1.0, 1.0), T)

    def aff(X):
        return (0.3 + 0.5 * X[..., 0] - 0.2 * X[..., 1])[..., None]

    return Scenario("p_harmonic", dom, prototype(p, 1.0, 1.0 / p), aff, aff,
                    lambda X, t: aff(X), base_cells=8, base_ell=4)


def expanding_ball(T: float = 0.4) -> Scenario:
    dom = geometry.moving_ball((1.0, 1.0), T, 0.2, 0.5)

    def u_star(X):
        return (0.5 + 0.5 * X[..., 0])[..., None]

    def u_o(X):
        from .verify import smooth_bump
        return u_star(X) + smooth_bump(X, (0.5, 0.5), 0.2)[..., None]

    return Scenario("expanding_ball", dom, with_lower_order(2.5, 2.0, 0.5), u_o, u_star,
                    base_cells=16, base_ell=8, inner_steps=2)


def shrinking_ball(T: float = 0.4, rate: float = 0.5) -> Scenario:
    dom = geometry.moving_ball((1.0, 1.0), T, 0.45, -rate)

    def u_star(X):
        return (0.2 + 0.3 * X[..., 1])[..., None]

    def u_o(X):
        from .verify import smooth_bump
        return u_star(X) + smooth_bump(X, (0.5, 0.5), 0.45)[..., None]

    return Scenario("shrinking_ball", dom, prototype(2.0, 1.0, 0.5), u_o, u_star,
                    base_cells=16, base_ell=8, inner_steps=2)


def petrovskii(lam: float = 0.5, T: float = 0.05, R0: float = 0.4, p: float = 3.0,
               base_cells: int = 16, base_ell: int = 16) -> Scenario:
    """|x - c| < K (T - t)^lam with K chosen so the initial radius is R0;
    u = 1 inside initially, zero lateral datum, f = |xi|^p / p."""
    K = R0 / T ** lam
    dom = geometry.petrovskii((1.0, 1.0), T, lam, K)

    def u_o(X):
        return np.ones(X.shape[:-1] + (1,))

    return Scenario(f"petrovskii_{lam:g}", dom, prototype(p, 1.0, 1.0 / p), u_o, _zeros,
                    base_cells=base_cells, base_ell=base_ell, inner_steps=1)


SCENARIOS = {
    "zero": zero,
    "heat": heat,
    "porous": porous,
    "p_harmonic": p_harmonic,
    "expanding_ball": expanding_ball,
    "shrinking_ball": shrinking_ball,
    "petrovskii": petrovskii,
}


def get(name: str, **kw) -> Scenario:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}")
    return SCENARIOS[name](**kw)
