import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import solved
from noncyl import io, verify


@settings(max_examples=40, deadline=None)
@given(vals=arrays(np.float64, (4, 3, 2), elements=st.floats(allow_nan=False, allow_infinity=False)),
       mask=arrays(bool, (4, 3)))
def test_field_round_trip_is_bit_exact(vals, mask, tmp_path_factory):
    path = tmp_path_factory.mktemp("f") / "u.csv"
    io.write_field(path, vals, 0.1, mask)
    back, m = io.read_field(path)
    assert np.array_equal(back, vals) and np.array_equal(m, mask)


def test_slice_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    ind = rng.random((5, 6)) > 0.5
    dist = rng.random((5, 6))
    io.write_slice(tmp_path / "s.csv", ind, dist)
    a, b = io.read_slice(tmp_path / "s.csv")
    assert np.array_equal(a, ind) and np.array_equal(b, dist)


def test_record_round_trip(tmp_path):
    sc, rec = solved("shrinking_ball")
    io.save_record(tmp_path, rec)
    u = io.load_field(tmp_path, rec.u.h_x, rec.u.h_t)
    assert np.array_equal(u.values, rec.u.values)
    assert np.array_equal(u.mask, rec.u.mask)
    assert np.array_equal(u.u_star, rec.u.u_star)
    hand = io.load_handoffs(tmp_path)
    assert sorted(hand) == sorted(rec.handoffs)
    assert all(np.array_equal(hand[k], rec.handoffs[k]) for k in hand)
    assert io.load_ledger(tmp_path) == rec.ledger
    header, rows = io.read_csv(tmp_path / "traces.csv")
    assert header[0] == "slab" and rows.shape[0] == len(rec.traces)


def test_ledger_missing_fields(tmp_path):
    io.write_csv(tmp_path / "ledger.csv", ["k", "t"], [[0, 0.0]])
    with pytest.raises(ValueError, match="ledger missing fields"):
        io.load_ledger(tmp_path)
    with pytest.raises(FileNotFoundError):
        io.load_field(tmp_path / "nothing", 0.1, 0.1)


def test_manifest_documents_columns(tmp_path):
    io.write_manifest(tmp_path / "m.ini", {"run": {"seed": 3, "flag": True, "xs": [1.5, 2.0]}},
                      ["study.csv"])
    text = (tmp_path / "m.ini").read_text()
    assert "study.csv: " + io.COLUMNS["study.csv"] in text
    assert "units:" in text
    cp = io.read_manifest(tmp_path / "m.ini")
    assert cp["run"]["seed"] == "3" and cp["run"]["flag"] == "true"
    assert cp["run"]["xs"] == "1.5, 2.0"


def test_diagnostics_table(tmp_path):
    rep = verify.DiagnosticsReport()
    rep.add("vi[a, tau=0.1]", 1.0, 1.25, 0.0)
    io.write_diagnostics(tmp_path / "d.csv", rep)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "name,lhs,rhs,slack,tol,ok"
    assert lines[1].endswith("0.25,0,1")


def test_empty_csv(tmp_path):
    io.write_csv(tmp_path / "e.csv", ["a", "b"], [])
    h, rows = io.read_csv(tmp_path / "e.csv")
    assert h == ["a", "b"] and rows.shape == (0, 2)
