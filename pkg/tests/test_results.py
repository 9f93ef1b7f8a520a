import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vlcbo.results import ResultTable, emit, read_json


def test_empty_csv_is_header_only(tmp_path):
    t = ResultTable(["a", "b"])
    emit(t, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == "a,b\n"


def test_row_checks():
    t = ResultTable(["a"])
    with pytest.raises(ValueError):
        t.add(b=1)


def test_csv_formatting(tmp_path):
    t = ResultTable(["x", "k", "ok", "s"])
    t.add(x=0.1, k=3, ok=True, s="fine")
    emit(t, tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[1] == "0.10000000000000001,3,1,fine"


def test_bad_format(tmp_path):
    with pytest.raises(ValueError):
        emit(ResultTable(["a"]), tmp_path / "x", "xml")


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(finite, st.integers(-10 ** 9, 10 ** 9), st.text(max_size=8)), max_size=20))
def test_json_round_trip_and_determinism(tmp_path_factory, rows):
    d = tmp_path_factory.mktemp("rt")
    t = ResultTable(["v", "k", "s"], {"v": "W"}, {"seed": 3})
    for v, k, s in rows:
        t.add(v=v, k=k, s=s)
    emit(t, d / "a.json", "json")
    emit(t, d / "b.json", "json")
    assert (d / "a.json").read_bytes() == (d / "b.json").read_bytes()
    back = read_json(d / "a.json")
    assert back.rows == t.rows and back.units["v"] == "W" and back.meta["seed"] == 3


def test_nan_survives_json(tmp_path):
    t = ResultTable(["v"])
    t.add(v=float("nan"))
    emit(t, tmp_path / "n.json", "json")
    doc = json.loads((tmp_path / "n.json").read_text())
    assert doc["columns"]["v"] == [None]
    assert np.isnan(read_json(tmp_path / "n.json").rows[0][0])
    assert "version" in doc["metadata"]
