"""Domains shrinking like (T - t)^lambda.  For lambda above 1/p the
solution follows the lateral datum as the domain closes; below it the
deviation lingers and decays only slowly with refinement."""
from noncyl import geometry, scenarios, solver, verify


def main():
    for lam in (0.5, 0.2):
        sc = scenarios.petrovskii(lam=lam)
        cls = geometry.classify_petrovskii(lam, sc.spec.p)
        vals = []
        for level in range(3):
            h = sc.h_x(level)
            X, u_o, u_star = sc.data(h)
            cfg = solver.SolverConfig(ell_sequence=(sc.ell(level),), inner_steps=sc.inner_steps, h_x=h)
            rec = solver.solve(sc.domain, u_o, u_star, sc.spec, cfg)[0]
            vals.append(verify.shrink_indicator(rec.u, sc.domain, sc.spec.q))
        print(f"lambda = {lam} ({cls}): deviation on the last resolved slice "
              + ", ".join(f"{v:.4f}" for v in vals))


if __name__ == "__main__":
    main()
