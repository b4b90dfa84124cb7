import functools

import pytest

from noncyl import scenarios, solver

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def solved(name: str, level: int = 0, strict: bool = False, **kw):
    """Solve a built-in scenario once per session; returns (scenario, record)."""
    sc = scenarios.get(name, **kw)
    h = sc.h_x(level)
    X, u_o, u_star = sc.data(h)
    cfg = solver.SolverConfig(ell_sequence=(sc.ell(level),), inner_steps=sc.inner_steps,
                              h_x=h, eps=sc.eps, strict=strict)
    rec = solver.solve(sc.domain, u_o, u_star, sc.spec, cfg)[0]
    return sc, rec


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
