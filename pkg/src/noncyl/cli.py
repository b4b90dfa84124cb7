"""Configuration-driven runs: solve, verify, domain-check,
convergence-study and oracle-compare.

A run is described by an INI file::

    [scenario]
    name = heat
    level = 0

    [solver]
    ell_sequence = 8, 16
    inner_steps = 1

    [verify]
    c_tol = 1.0

Every run writes ``manifest.ini`` into its output directory.  The manifest
echoes the fully resolved configuration, so ``--config out/manifest.ini``
reproduces the run.  Exit codes: 0 success, 1 verification failure,
2 invalid configuration, 3 optimizer failure, 4 missing artifacts.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, geometry, io, scenarios, solver, verify
from .calculus import make_integrand
from .fields import integrate

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_OPTIMIZER, EXIT_MISSING = 0, 1, 2, 3, 4

EXISTENCE = {"solve", "verify", "convergence-study", "oracle-compare"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = "heat"
    level: int = 0
    scenario_params: dict = field(default_factory=dict)
    domain: dict = field(default_factory=dict)        # overrides the scenario's domain
    integrand: dict = field(default_factory=dict)     # overrides the scenario's integrand
    data: dict = field(default_factory=dict)          # u_o / u_star generators
    solver: solver.SolverConfig = field(default_factory=solver.SolverConfig)
    c_tol: float = 1.0
    checks: tuple = ("energy", "variational", "int_by_parts", "dual_norm")
    levels: tuple = (0, 1, 2)
    grids: tuple = ()                                 # cells per unit length, one per level
    record: str = ""                                  # stored run to verify
    out: str = "out"
    seed: int = 0
    solver_keys: set = field(default_factory=set)     # solver keys set explicitly


# ---------------------------------------------------------------------------
# parsing

def _floats(s) -> tuple:
    return tuple(float(x) for x in str(s).replace(",", " ").split())


def _ints(s) -> tuple:
    return tuple(int(x) for x in str(s).replace(",", " ").split())


def _num(s):
    s = str(s).strip()
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    if "," in s or " " in s.strip():
        try:
            return _floats(s)
        except ValueError:
            pass
    if s.lower() in ("true", "false"):
        return s.lower() == "true"
    return s


def _bool(s) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def parse_config(text: str | None = None, path=None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        if path is not None:
            with open(path) as fh:
                cp.read_file(fh)
        elif text:
            cp.read_string(text)
    except (configparser.Error, OSError) as e:
        raise ConfigError(f"unreadable config: {e}") from e
    rc = RunConfig()
    try:
        if cp.has_section("scenario"):
            s = dict(cp["scenario"])
            rc.scenario = s.pop("name", rc.scenario)
            rc.level = int(s.pop("level", rc.level))
            rc.scenario_params = {k: _num(v) for k, v in s.items()}
        if cp.has_section("domain"):
            rc.domain = {k: _num(v) for k, v in cp["domain"].items()}
        if cp.has_section("integrand"):
            rc.integrand = {k: _num(v) for k, v in cp["integrand"].items()}
        if cp.has_section("data"):
            rc.data = {k: _num(v) for k, v in cp["data"].items()}
        sv = dict(cp["solver"]) if cp.has_section("solver") else {}
        kw = {}
        if "ell_sequence" in sv:
            kw["ell_sequence"] = _ints(sv["ell_sequence"])
        for key, cast in (("inner_steps", int), ("h_x", float), ("tol", float),
                          ("max_iter", int), ("memory", int), ("eps", float)):
            if key in sv:
                kw[key] = cast(sv[key])
        if "strict" in sv:
            kw["strict"] = _bool(sv["strict"])
        rc.solver = dataclasses.replace(rc.solver, **kw) if kw else rc.solver
        rc.solver_keys = set(kw)
        if cp.has_section("verify"):
            v = cp["verify"]
            rc.c_tol = float(v.get("c_tol", rc.c_tol))
            if "checks" in v:
                rc.checks = tuple(x.strip() for x in v["checks"].split(",") if x.strip())
            rc.record = v.get("record", rc.record)
        if cp.has_section("study"):
            st = cp["study"]
            if "levels" in st:
                rc.levels = _ints(st["levels"])
            if "grids" in st:
                rc.grids = _ints(st["grids"])
        if cp.has_section("run"):
            r = cp["run"]
            rc.seed = int(r.get("seed", rc.seed))
            rc.out = r.get("out", rc.out)
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e)) from e
    return rc


def config_sections(rc: RunConfig, sc: scenarios.Scenario, cfg=None) -> dict:
    """The fully resolved configuration as manifest sections.

    Overrides are echoed verbatim; the resolved domain and integrand are
    recorded in ``resolved.*`` sections, which parsing ignores."""
    s = _resolve_solver(rc, sc) if cfg is None else cfg
    out = {"scenario": {"name": rc.scenario, "level": rc.level, **rc.scenario_params}}
    for name in ("domain", "integrand", "data"):
        if getattr(rc, name):
            out[name] = dict(getattr(rc, name))
    out["solver"] = {"ell_sequence": list(s.ell_sequence), "inner_steps": s.inner_steps,
                     "h_x": float(s.h_x), "tol": float(s.tol), "max_iter": s.max_iter,
                     "memory": s.memory, "eps": float(s.eps), "strict": s.strict}
    out["verify"] = {"c_tol": float(rc.c_tol), "checks": ", ".join(rc.checks),
                     **({"record": rc.record} if rc.record else {})}
    out["study"] = {"levels": list(rc.levels), **({"grids": list(rc.grids)} if rc.grids else {})}
    out["run"] = {"seed": rc.seed, "out": rc.out, "version": __version__}
    out["resolved.domain"] = {"kind": sc.domain.kind, "box": list(sc.domain.box),
                              "T": float(sc.domain.T), "n": sc.domain.n,
                              **{k: v for k, v in sc.domain.params.items()}}
    out["resolved.integrand"] = {"name": sc.spec.name, "p": float(sc.spec.p),
                                 "q": float(sc.spec.q), "nu": float(sc.spec.nu),
                                 "L": float(sc.spec.L), "N": sc.spec.N,
                                 **{k: v for k, v in sc.spec.params.items()}}
    out["resolved.data"] = {"exact_solution": sc.exact is not None, "notes": sc.notes or "-"}
    return out


# ---------------------------------------------------------------------------
# scenario assembly

def _generator(name, params, sc: scenarios.Scenario, base):
    name = str(name)
    if name == "scenario":
        return base
    if name == "zero":
        return lambda X: np.zeros(X.shape[:-1] + (1,))
    if name == "one":
        return lambda X: np.ones(X.shape[:-1] + (1,))
    if name == "sine":
        box = sc.domain.box
        return lambda X: np.prod([np.sin(np.pi * X[..., d] / box[d]) for d in range(len(box))],
                                 axis=0)[..., None]
    if name == "affine":
        c = params.get("affine", (0.0,))
        c = c if isinstance(c, tuple) else (float(c),)
        return lambda X: (c[0] + sum(c[d + 1] * X[..., d] for d in range(len(c) - 1)))[..., None]
    if name == "bump":
        rad = float(params.get("bump_radius", 0.3))
        amp = float(params.get("bump_amplitude", 1.0))
        center = tuple(0.5 * a for a in sc.domain.box)
        return lambda X: amp * verify.smooth_bump(X, center, rad)[..., None]
    raise ConfigError(f"unknown data generator {name!r}")


def build_scenario(rc: RunConfig) -> scenarios.Scenario:
    if rc.scenario not in scenarios.SCENARIOS:
        raise ConfigError(f"unknown scenario {rc.scenario!r}")
    try:
        sc = scenarios.get(rc.scenario, **rc.scenario_params)
    except TypeError as e:
        raise ConfigError(f"bad scenario parameters: {e}") from e
    changed = False
    if rc.domain:
        d = dict(rc.domain)
        kind = d.pop("kind", "cylinder")
        box = d.pop("box", (1.0, 1.0))
        box = box if isinstance(box, tuple) else (float(box),) * 2
        T = float(d.pop("T", sc.domain.T))
        try:
            sc.domain = geometry.make_domain(kind, box, T, **d)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad domain: {e}") from e
        changed = True
    if rc.integrand:
        d = dict(rc.integrand)
        name = d.pop("name", "prototype")
        try:
            p, q = float(d.pop("p")), float(d.pop("q"))
        except KeyError as e:
            raise ConfigError(f"integrand needs {e}") from e
        d.pop("nu", None), d.pop("L", None)
        try:
            sc.spec = make_integrand(name, p, q, **d)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad integrand: {e}") from e
        changed = True
    if rc.data:
        us = _generator(rc.data.get("u_star", "scenario"), rc.data, sc, sc.u_star)
        uo_raw = _generator(rc.data.get("u_o", "scenario"), rc.data, sc, sc.u_o)
        if rc.data.get("u_o") == "bump":
            sc.u_o = lambda X, _b=uo_raw, _s=us: _s(X) + _b(X)
        else:
            sc.u_o = uo_raw
        sc.u_star = us
        changed = True
    if changed:
        sc.exact = None
    return sc


def validate(rc: RunConfig, sc: scenarios.Scenario, command: str) -> None:
    """Range checks; the lower bound on p applies to the existence pipeline."""
    p, q, n = sc.spec.p, sc.spec.q, sc.domain.n
    if q <= 0:
        raise ConfigError(f"q must be positive, got {q}")
    if command in EXISTENCE:
        lower = max(1.0, n * (q + 1) / (n + q + 1))
        if not p > lower:
            raise ConfigError(f"p = {p} violates p > max(1, n(q+1)/(n+q+1)) = {lower:g}")
    if rc.c_tol < 0:
        raise ConfigError("c_tol must be nonnegative")
    if rc.grids and len(rc.grids) != len(rc.levels):
        raise ConfigError("one grid per study level is required")


def _grid_for(rc: RunConfig, sc, level: int) -> float:
    if rc.grids:
        return 1.0 / rc.grids[list(rc.levels).index(level)] if level in rc.levels else sc.h_x(level)
    if "h_x" in rc.solver_keys:
        return rc.solver.h_x
    return sc.h_x(level)


def _resolve_solver(rc: RunConfig, sc, level: int | None = None) -> solver.SolverConfig:
    level = rc.level if level is None else level
    keys = rc.solver_keys
    kw = {"h_x": _grid_for(rc, sc, level)}
    if "ell_sequence" not in keys:
        kw["ell_sequence"] = (sc.ell(level),)
    if "inner_steps" not in keys:
        kw["inner_steps"] = sc.inner_steps
    if "eps" not in keys:
        kw["eps"] = sc.eps
    return dataclasses.replace(rc.solver, **kw)


def _solve(sc, cfg):
    X, u_o, u_star = sc.data(cfg.h_x)
    return solver.solve(sc.domain, u_o, u_star, sc.spec, cfg)


def _exact_stack(sc, u):
    if sc.exact is None:
        return None
    X = geometry.node_coords(sc.domain.box, u.h_x)
    return np.stack([np.asarray(sc.exact(X, t), float) for t in u.times])


def _errors(u, ex) -> dict:
    diff = u.values - ex
    l2 = [integrate(np.sum(diff[k] ** 2, axis=-1), u.h_x) ** 0.5 for k in range(u.K + 1)]
    l2_final = l2[-1]
    l1 = integrate(np.sum(np.abs(diff[-1]), axis=-1), u.h_x)
    l1_ref = integrate(np.sum(np.abs(ex[-1]), axis=-1), u.h_x)
    return {"err_sup_l2": float(max(l2)), "err_l2_final": float(l2_final),
            "err_l1_final_rel": float(l1 / l1_ref) if l1_ref > 0 else float(l1)}


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(rc: RunConfig, sc, out: Path) -> int:
    cfg = _resolve_solver(rc, sc)
    recs = _solve(sc, cfg)
    rows = []
    for rec in recs:
        io.save_record(out / f"ell_{rec.ell}", rec)
        rows.append([rec.ell, cfg.h_x, rec.u.h_t, rec.u.K])
    sections = config_sections(rc, sc, cfg)
    sections["records"] = {f"ell_{r.ell}": f"h_x={cfg.h_x!r} h_t={r.u.h_t!r} K={r.u.K} "
                           f"max_residual={max((t.residual for t in r.traces), default=0.0)!r}"
                           for r in recs}
    consts = verify.energy_constants(recs[0].u.values[0], recs[0].u.u_star, sc.spec,
                                     sc.domain.T, cfg.h_x)
    sections["constants"] = {k: float(v) for k, v in consts.items()}
    io.write_manifest(out / "manifest.ini", sections,
                      ["ledger.csv", "traces.csv", "snapshots/u_KKKKK.csv", "lateral.csv",
                       "handoffs/u_KKKKK.csv"])
    for r in recs:
        print(f"ell={r.ell} h_x={cfg.h_x:g} h_t={r.u.h_t:g} steps={r.u.K} "
              f"runtime={r.runtime:.2f}s -> {out / f'ell_{r.ell}'}")
    return EXIT_OK


def _records_from(rc: RunConfig, sc):
    """(ell, GridFunction) pairs from a stored run or a fresh solve."""
    if rc.record:
        d = Path(rc.record)
        man = d / "manifest.ini"
        if not man.exists():
            raise FileNotFoundError(f"missing manifest {man}")
        cp = io.read_manifest(man)
        out = []
        for key, desc in cp["records"].items():
            meta = dict(kv.split("=") for kv in desc.split())
            u = io.load_field(d / key, float(meta["h_x"]), float(meta["h_t"]))
            out.append((int(key.split("_")[1]), u))
        return out
    cfg = _resolve_solver(rc, sc)
    return [(r.ell, r.u) for r in _solve(sc, cfg)]


def cmd_verify(rc: RunConfig, sc, out: Path) -> int:
    pairs = _records_from(rc, sc)
    ok = True
    summary = {}
    for ell, u in pairs:
        ex = _exact_stack(sc, u)
        rep = verify.DiagnosticsReport()
        full = verify.certify_solution(u, sc.domain, sc.spec, rc.c_tol, exact=ex, seed=rc.seed)
        for c in full.checks:
            kind = c.name.split("[")[0]
            if (kind in ("coercivity", "minimality", "growth") and "energy" in rc.checks) or \
               (kind == "vi" and "variational" in rc.checks) or \
               (kind.startswith("ibp") and "int_by_parts" in rc.checks):
                rep.checks.append(c)
        io.write_diagnostics(out / f"ell_{ell}" / "diagnostics.csv", rep)
        s = {"checks": len(rep.checks), "failed": sum(not c.ok for c in rep.checks),
             "min_slack": rep.min_slack}
        if "dual_norm" in rc.checks:
            dn = verify.dual_norm_exact(u, sc.domain, sc.spec)
            b = verify.dual_norm_bound(u.values[0], u.u_star, sc.spec, sc.domain.T, u.h_x)
            s.update({"dual_norm": dn, "dual_bound": b, "dual_ratio": dn / b if b > 0 else 0.0})
        summary[f"ell_{ell}"] = " ".join(f"{k}={v!r}" for k, v in s.items())
        ok &= rep.ok
        print(f"ell={ell}: {s['checks']} checks, {s['failed']} failed, min slack {s['min_slack']:.3e}")
    sections = config_sections(rc, sc)
    sections["verdicts"] = {**summary, "ok": ok}
    io.write_manifest(out / "manifest.ini", sections, ["diagnostics.csv"])
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_domain_check(rc: RunConfig, sc, out: Path) -> int:
    dom = sc.domain
    h_x = _grid_for(rc, sc, rc.level)
    n_times = 9
    times = np.linspace(0.0, dom.T, n_times)
    verdicts = {"kind": dom.kind}
    d = geometry.measure_density_check(dom, 0.5 * dom.T, 0.2, [2 * h_x, 4 * h_x], h_x)
    verdicts["density_ok"] = d.ok
    verdicts["density_worst_ratio"] = d.worst_ratio
    try:
        prof = geometry.profile_for(dom, p=sc.spec.p, q=sc.spec.q)
        g = geometry.growth_condition_check(dom, prof, times[:-1], h_x)
        verdicts.update({"growth_variant": prof.variant, "growth_ok": g.ok,
                         "growth_margin": g.margin, "r_exponent": prof.r})
    except ValueError as e:
        verdicts["growth"] = f"unavailable ({e})"
    if dom.kind == "petrovskii":
        lam = dom.params["lam"]
        verdicts["petrovskii_lambda"] = lam
        verdicts["petrovskii_class"] = geometry.classify_petrovskii(lam, sc.spec.p)
        verdicts["petrovskii_threshold"] = 1.0 / sc.spec.p
    for k, t in enumerate(times):
        grid = geometry.rasterize(dom, float(t), h_x)
        io.write_slice(out / "slices" / f"slice_{k:05d}.csv", grid.indicator, grid.dist)
    sections = config_sections(rc, sc)
    sections["verdicts"] = verdicts
    sections["slices"] = {f"slice_{k:05d}": repr(float(t)) for k, t in enumerate(times)}
    io.write_manifest(out / "manifest.ini", sections, ["slices/slice_KKKKK.csv"])
    for k, v in verdicts.items():
        print(f"{k}: {v}")
    ok = d.ok and verdicts.get("growth_ok", True)
    return EXIT_OK if ok else EXIT_VERIFY


def _cauchy(prev, u) -> float:
    """sup over the coarse times of the L^2 difference on the coarse nodes."""
    if prev is None:
        return float("nan")
    rx = prev.h_x / u.h_x
    rt = prev.h_t / u.h_t
    if abs(rx - round(rx)) > 1e-9 or abs(rt - round(rt)) > 1e-9:
        return float("nan")
    rx, rt = int(round(rx)), int(round(rt))
    sl = tuple(slice(None, None, rx) for _ in u.shape)
    fine = u.values[::rt][(slice(None),) + sl]
    if fine.shape != prev.values.shape:
        return float("nan")
    d = fine - prev.values
    return float(max(integrate(np.sum(d[k] ** 2, axis=-1), prev.h_x) ** 0.5
                     for k in range(prev.K + 1)))


def cmd_convergence_study(rc: RunConfig, sc, out: Path) -> int:
    rows = []
    prev = None
    for level in rc.levels:
        cfg = _resolve_solver(rc, sc, level)
        if "ell_sequence" not in rc.solver_keys:
            cfg = dataclasses.replace(cfg, ell_sequence=(sc.ell(level),))
        else:
            i = list(rc.levels).index(level)
            seq = rc.solver.ell_sequence
            cfg = dataclasses.replace(cfg, ell_sequence=(seq[min(i, len(seq) - 1)],))
        rec = _solve(sc, cfg)[0]
        u = rec.u
        ex = _exact_stack(sc, u)
        e = _errors(u, ex) if ex is not None else {"err_sup_l2": float("nan"),
                                                    "err_l1_final_rel": float("nan")}
        en = verify.energy_certificate(u, u.values[0], sc.spec)
        fam = verify.comparison_family(u, sc.domain, sc.spec, u_o=u.values[0], seed=rc.seed)
        vi = np.inf
        for v in fam.values():
            tol1 = verify.map_tolerance(1.0, u, v, u.values[0], sc.spec)
            for j in verify.tau_indices(u.K):
                vi = min(vi, verify.variational_residual(u, v, j, u.values[0], sc.spec) / tol1)
        rows.append([level, rec.ell, cfg.h_x, u.h_t, e["err_sup_l2"], e["err_l1_final_rel"],
                     _cauchy(prev, u), en.min_slack, float(vi), rec.runtime])
        print(f"level={level} ell={rec.ell} h_x={cfg.h_x:g} err_sup_l2={e['err_sup_l2']:.4e} "
              f"vi_min={vi:.3f} runtime={rec.runtime:.2f}s")
        prev = u
    io.write_csv(out / "study.csv", ["level", "ell", "h_x", "h_t", "err_sup_l2", "err_l1_final",
                                     "cauchy_sup_l2", "energy_min_slack", "vi_min_slack_scaled",
                                     "runtime"], rows)
    sections = config_sections(rc, sc)
    sections["solver"]["ell_sequence"] = [r[1] for r in rows]
    sections["study"]["grids"] = [int(round(1.0 / r[2])) for r in rows]
    errs = [r[4] for r in rows]
    mono = all(b < a for a, b in zip(errs, errs[1:])) if sc.exact is not None else "n/a"
    sections["verdicts"] = {"error_decreasing": mono,
                            "energy_ok": all(r[7] >= 0 for r in rows),
                            "vi_ok": all(r[8] >= -rc.c_tol for r in rows)}
    io.write_manifest(out / "manifest.ini", sections, ["study.csv"])
    ok = sections["verdicts"]["energy_ok"] and sections["verdicts"]["vi_ok"]
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_oracle_compare(rc: RunConfig, sc, out: Path) -> int:
    if sc.exact is None:
        raise ConfigError(f"scenario {sc.name!r} has no exact solution")
    cfg = _resolve_solver(rc, sc)
    rows = []
    for rec in _solve(sc, cfg):
        u = rec.u
        e = _errors(u, _exact_stack(sc, u))
        rows.append([rec.ell, cfg.h_x, u.h_t, e["err_sup_l2"], e["err_l2_final"], e["err_l1_final_rel"]])
        print(f"ell={rec.ell} h_x={cfg.h_x:g} h_t={u.h_t:g} sup L2 error {e['err_sup_l2']:.4e}, "
              f"relative final L1 error {e['err_l1_final_rel']:.4e}")
    io.write_csv(out / "oracle.csv", ["ell", "h_x", "h_t", "err_sup_l2", "err_l2_final",
                                      "err_l1_final_rel"], rows)
    io.write_manifest(out / "manifest.ini", config_sections(rc, sc), ["oracle.csv"])
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "domain-check": cmd_domain_check,
    "convergence-study": cmd_convergence_study,
    "oracle-compare": cmd_oracle_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noncyl", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="INI run configuration")
        sp.add_argument("--out", metavar="DIR", help="artifact directory")
        sp.add_argument("--seed", type=int, metavar="N")
        sp.add_argument("--scenario", help="built-in scenario name (overrides the config)")
        sp.add_argument("--ell-sequence", metavar="L1,L2,...", help="slab counts")
        sp.add_argument("--grid", metavar="M[,M2,...]",
                        help="cells per unit length; a list gives one grid per study level")
        sp.add_argument("--strict-slice-constraint", action="store_true",
                        help="pin off each slice instead of off the slab hull")
        if name == "verify":
            sp.add_argument("--record", metavar="DIR", help="verify a stored solve instead of solving")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = parse_config(path=args.config) if args.config else RunConfig()
        if args.scenario:
            rc.scenario = args.scenario
        if args.out:
            rc.out = args.out
        if args.seed is not None:
            rc.seed = args.seed
        keys = set(rc.solver_keys)
        if args.ell_sequence:
            rc.solver = dataclasses.replace(rc.solver, ell_sequence=_ints(args.ell_sequence))
            keys.add("ell_sequence")
        if args.grid:
            g = _ints(args.grid)
            if len(g) == 1 and args.command != "convergence-study":
                rc.solver = dataclasses.replace(rc.solver, h_x=1.0 / g[0])
                keys.add("h_x")
            else:
                rc.grids = g
        if args.strict_slice_constraint:
            rc.solver = dataclasses.replace(rc.solver, strict=True)
            keys.add("strict")
        rc.solver_keys = keys
        if getattr(args, "record", None):
            rc.record = args.record
        sc = build_scenario(rc)
        validate(rc, sc, args.command)
        out = Path(rc.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](rc, sc, out)
    except ConfigError as e:
        print(f"noncyl: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except solver.OptimizerError as e:
        print(f"noncyl: optimizer failure: {e}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except FileNotFoundError as e:
        print(f"noncyl: missing artifact: {e}", file=sys.stderr)
        return EXIT_MISSING


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
