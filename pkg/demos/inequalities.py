"""Elementary inequalities behind the scheme, checked numerically:
constants of the power-map inequalities, the exponential time mollification and
the Gagliardo-Nirenberg interpolation."""
import numpy as np

from noncyl import calculus, fields


def pair_constants():
    rng = np.random.default_rng(0)
    for q in (0.5, 1.0, 2.0):
        fit = calculus.fit_pair_constants(q, rng)
        # power_gap only applies for q >= 1
        vals = {k: v for k, v in fit.items() if not isinstance(v, dict) and np.isfinite(v)}
        print(f"q = {q}: " + ", ".join(f"{k} {v:.4f}" for k, v in sorted(vals.items())))


def mollification():
    rng = np.random.default_rng(1)
    v = fields.scalar_field(rng.standard_normal((41, 9, 9)), 1 / 8, 0.005)
    v_o = rng.standard_normal((9, 9, 1))
    for h in (0.04, 0.02, 0.01, 0.005):
        w = fields.landes_mollify(v, v_o, h)
        lhs, rhs = fields.landes_bound(v, v_o, h, 2.0, v.K)
        print(f"h = {h:<6} ODE residual {fields.landes_ode_residual(w, v, h):.1e}  "
              f"L2 bound {lhs:.4f} <= {rhs:.4f}  distance to v {fields.landes_error(v, v_o, h):.4f}")


def gagliardo():
    spec = calculus.prototype(3.0, 1.0)
    X = np.linspace(0, 1, 17)
    xx, yy = np.meshgrid(X, X, indexing="ij")
    for k in (1, 2, 4):
        prof = np.sin(k * np.pi * xx) * np.sin(k * np.pi * yy)
        u = fields.scalar_field(np.stack([prof] * 5), 1 / 16, 0.1)
        r = fields.gagliardo_check(u, spec)
        print(f"mode {k}: m = {fields.gagliardo_exponent(2, 3.0, 1.0):.2f}, ratio {r.ratio:.4f}")


if __name__ == "__main__":
    pair_constants()
    mollification()
    gagliardo()
