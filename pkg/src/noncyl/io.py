"""Plain-text artifacts: manifests, CSV ledgers, snapshots and tables.

Floats are written with ``%.17g`` so every value survives a round trip
through disk bit for bit.  Manifests are INI files (``key = value`` under
``[section]`` headers) readable by :mod:`configparser`; their leading
comment block documents the columns of every CSV written next to them.
"""
from __future__ import annotations

import configparser
import os
from pathlib import Path

import numpy as np

from .fields import GridFunction

FMT = "%.17g"

COLUMNS = {
    "ledger.csv": "k, t, grad_p = int |Du|^p, lq1 = int |u|^(q+1), f = int f(x,u,Du); one row per grid time",
    "traces.csv": "slab, step, iterations, residual, F_start, F_end; one row per implicit step",
    "snapshots/u_KKKKK.csv": "i0..i(n-1) node index, x0..x(n-1) coordinate, u0..u(N-1) value, mask (1 = pinned to the lateral datum)",
    "lateral.csv": "i0..i(n-1), x0..x(n-1), u0..u(N-1): the lateral datum u_*",
    "handoffs/u_KKKKK.csv": "same layout as snapshots, without mask: state handed to the slab starting at index K",
    "slices/slice_KKKKK.csv": "i0..i(n-1) node index, indicator (1 inside the slice), dist (distance to the complement)",
    "diagnostics.csv": "name, lhs, rhs, slack = rhs - lhs, tol, ok (1 when slack >= -tol)",
    "study.csv": "level, ell, h_x, h_t, err_sup_l2, err_l1_final, cauchy_sup_l2, energy_min_slack, vi_min_slack_scaled, runtime",
    "oracle.csv": "ell, h_x, h_t, err_sup_l2, err_l2_final, err_l1_final_rel",
    "dual_norm.csv": "scenario, level, dual_norm, bound, ratio",
}

UNITS = "all quantities are dimensionless; lengths in box units, times in units of T"


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt_value(x) for x in v)
    return str(v)


def write_manifest(path, sections: dict, columns=None) -> None:
    """Write an INI manifest.  ``sections`` maps section -> {key: value}."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for sec, kv in sections.items():
        cp[sec] = {k: _fmt_value(v) for k, v in kv.items()}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("# noncyl run manifest\n")
        fh.write(f"# units: {UNITS}\n")
        fh.write("# CSV columns:\n")
        for name in (columns if columns is not None else COLUMNS):
            fh.write(f"#   {name}: {COLUMNS[name]}\n")
        fh.write("\n")
        cp.write(fh)


def read_manifest(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    with open(path) as fh:
        cp.read_file(fh)
    return cp


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.asarray(rows, float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, len(header))
    np.savetxt(path, arr, delimiter=",", fmt=FMT, header=",".join(header), comments="")


def read_csv(path) -> tuple:
    """(header, rows) with rows as a float array of shape (m, columns)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if not fh.read(1):
            return header, np.zeros((0, len(header)))
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, rows


def write_table(path, header, rows) -> None:
    """CSV table whose cells may be strings; numbers use the exact format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(FMT % x if isinstance(x, (float, np.floating)) else str(x)
                              for x in r) + "\n")


# ---------------------------------------------------------------------------
# nodal fields

def _node_columns(shape, h_x):
    idx = np.indices(shape).reshape(len(shape), -1).T
    return idx, idx * h_x


def field_rows(v: np.ndarray, h_x: float, mask=None) -> tuple:
    shape = v.shape[:-1]
    n, N = len(shape), v.shape[-1]
    idx, x = _node_columns(shape, h_x)
    cols = [idx, x, v.reshape(-1, N)]
    header = [f"i{d}" for d in range(n)] + [f"x{d}" for d in range(n)] + [f"u{c}" for c in range(N)]
    if mask is not None:
        cols.append(np.asarray(mask, float).reshape(-1, 1))
        header.append("mask")
    return header, np.hstack(cols)


def write_field(path, v, h_x, mask=None) -> None:
    header, rows = field_rows(np.asarray(v, float), h_x, mask)
    write_csv(path, header, rows)


def read_field(path) -> tuple:
    """(values of shape (*shape, N), mask or None)."""
    header, rows = read_csv(path)
    n = sum(1 for c in header if c.startswith("i"))
    N = sum(1 for c in header if c.startswith("u"))
    idx = rows[:, :n].astype(int)
    shape = tuple(idx.max(axis=0) + 1)
    vals = np.zeros(shape + (N,))
    vals[tuple(idx.T)] = rows[:, 2 * n:2 * n + N]
    mask = None
    if "mask" in header:
        mask = np.zeros(shape, bool)
        mask[tuple(idx.T)] = rows[:, header.index("mask")] != 0
    return vals, mask


def write_slice(path, indicator, dist) -> None:
    shape = indicator.shape
    idx, _ = _node_columns(shape, 1.0)
    header = [f"i{d}" for d in range(len(shape))] + ["indicator", "dist"]
    rows = np.hstack([idx, indicator.reshape(-1, 1).astype(float), dist.reshape(-1, 1)])
    write_csv(path, header, rows)


def read_slice(path) -> tuple:
    header, rows = read_csv(path)
    n = len(header) - 2
    idx = rows[:, :n].astype(int)
    shape = tuple(idx.max(axis=0) + 1)
    ind = np.zeros(shape, bool)
    dist = np.zeros(shape)
    ind[tuple(idx.T)] = rows[:, n] != 0
    dist[tuple(idx.T)] = rows[:, n + 1]
    return ind, dist


# ---------------------------------------------------------------------------
# solve records

def save_record(directory, rec) -> None:
    """Snapshots, lateral datum, handoffs, energy ledger and step traces."""
    d = Path(directory)
    u = rec.u
    for k in range(u.K + 1):
        mask = None if u.mask is None else u.mask[k]
        write_field(d / "snapshots" / f"u_{k:05d}.csv", u.values[k], u.h_x,
                    mask if mask is not None else np.zeros(u.shape, bool))
    write_field(d / "lateral.csv", u.u_star, u.h_x)
    for k, state in sorted(rec.handoffs.items()):
        write_field(d / "handoffs" / f"u_{k:05d}.csv", state, u.h_x)
    L = rec.ledger
    write_csv(d / "ledger.csv", ["k", "t", "grad_p", "lq1", "f"],
              [[k, L["time"][k], L["grad_p"][k], L["lq1"][k], L["f"][k]] for k in range(u.K + 1)])
    write_csv(d / "traces.csv", ["slab", "step", "iterations", "residual", "F_start", "F_end"],
              [[t.slab, t.step, t.iterations, t.residual, t.F_start, t.F_end] for t in rec.traces])


def load_field(directory, h_x: float, h_t: float) -> GridFunction:
    """Rebuild the GridFunction written by :func:`save_record`."""
    d = Path(directory)
    snaps = sorted((d / "snapshots").glob("u_*.csv"))
    if not snaps:
        raise FileNotFoundError(f"no snapshots under {d}")
    vals, masks = [], []
    for s in snaps:
        v, m = read_field(s)
        vals.append(v)
        masks.append(m)
    u_star, _ = read_field(d / "lateral.csv")
    return GridFunction(np.stack(vals), h_x, h_t, u_star, np.stack(masks))


def load_handoffs(directory) -> dict:
    out = {}
    for s in sorted((Path(directory) / "handoffs").glob("u_*.csv")):
        out[int(s.stem.split("_")[1])] = read_field(s)[0]
    return out


def load_ledger(directory) -> dict:
    header, rows = read_csv(Path(directory) / "ledger.csv")
    need = {"k", "t", "grad_p", "lq1", "f"}
    if not need <= set(header):
        raise ValueError(f"ledger missing fields: {sorted(need - set(header))}")
    col = {h: rows[:, i] for i, h in enumerate(header)}
    return {"time": col["t"].tolist(), "grad_p": col["grad_p"].tolist(),
            "lq1": col["lq1"].tolist(), "f": col["f"].tolist()}


def write_diagnostics(path, report) -> None:
    rows = [[c.name, float(c.lhs), float(c.rhs), float(c.slack), float(c.tol), int(c.ok)]
            for c in report.checks]
    write_table(path, ["name", "lhs", "rhs", "slack", "tol", "ok"], rows)


def tree_digest(directory, exclude=("manifest.ini",)) -> dict:
    """Relative path -> file bytes for every artifact under ``directory``."""
    out = {}
    for root, _, files in os.walk(directory):
        for f in files:
            p = Path(root) / f
            rel = str(p.relative_to(directory))
            if f in exclude:
                continue
            out[rel] = p.read_bytes()
    return out
