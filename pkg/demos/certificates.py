"""What the verification layer reports for one solution: the energy
chain, the variational inequality against comparison maps, and the dual
norm of the time derivative next to its a priori bound."""
from noncyl import scenarios, solver, verify


def main():
    sc = scenarios.expanding_ball()
    h = sc.h_x(0)
    X, u_o, u_star = sc.data(h)
    rec = solver.solve(sc.domain, u_o, u_star, sc.spec,
                       solver.SolverConfig(ell_sequence=(8,), inner_steps=2, h_x=h))[0]
    u = rec.u

    chain = verify.energy_certificate(u, u.values[0], sc.spec)
    print(f"energy chain: {len(chain.checks)} links, ok={chain.ok}, "
          f"smallest outer slack {verify.chain_slack(chain):.4e}")
    consts = verify.energy_constants(u.values[0], u.u_star, sc.spec, sc.domain.T, h)
    print(f"C1^p = {consts['C1p']:.4f}   C2^(q+1) = {consts['C2q1']:.4f}")

    fam = verify.comparison_family(u, sc.domain, sc.spec, u_o=u.values[0], seed=0)
    for name, v in fam.items():
        tol = verify.map_tolerance(1.0, u, v, u.values[0], sc.spec)
        worst = min(verify.variational_residual(u, v, j, u.values[0], sc.spec)
                    for j in verify.tau_indices(u.K))
        print(f"  {name:16s} min slack / tol = {worst / tol:+.3f}")

    # an inflated field breaks the chain
    print("x10 field passes the chain:",
          verify.energy_certificate(u.with_values(10 * u.values), u.values[0], sc.spec).ok)

    dn = verify.dual_norm_exact(u, sc.domain, sc.spec)
    bound = verify.dual_norm_bound(u.values[0], u.u_star, sc.spec, sc.domain.T, h)
    est, _ = verify.dual_norm_estimate(u, verify.bump_family(u, sc.domain, 8), sc.spec,
                                       u.values[0], sc.domain.T)
    print(f"dual norm {dn:.4f} (bump lower bound {est:.4f}), bound {bound:.4f}, ratio {dn / bound:.3f}")


if __name__ == "__main__":
    main()
