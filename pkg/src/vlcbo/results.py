"""Column-oriented result tables with deterministic CSV/JSON output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else v
    return v


@dataclass
class ResultTable:
    columns: list
    units: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def add(self, **values):
        missing = set(self.columns) - values.keys()
        extra = values.keys() - set(self.columns)
        if missing or extra:
            raise ValueError(f"row mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        self.rows.append([values[c] for c in self.columns])

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def array(self, name):
        return np.array(self.column(name), dtype=float)

    def where(self, **eq):
        out = ResultTable(list(self.columns), dict(self.units), dict(self.meta))
        idx = {k: self.columns.index(k) for k in eq}
        out.rows = [r for r in self.rows if all(r[idx[k]] == v for k, v in eq.items())]
        return out

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": {"version": __version__, **{k: _plain(v) for k, v in sorted(self.meta.items())},
                         "units": {c: self.units.get(c, "") for c in self.columns}},
            "columns": {c: [_plain(r[i]) for r in self.rows] for i, c in enumerate(self.columns)},
        }
        return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"


def emit(table: ResultTable, path, fmt="csv"):
    """Write ``table`` to ``path`` ('-' for stdout) as CSV or JSON."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = table.to_csv() if fmt == "csv" else table.to_json()
    if str(path) == "-":
        import sys
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_json(path) -> ResultTable:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    cols = list(doc["columns"])
    meta = dict(doc["metadata"])
    units = meta.pop("units", {})
    meta.pop("version", None)
    t = ResultTable(cols, units, meta)
    n = len(doc["columns"][cols[0]]) if cols else 0
    t.rows = [[float("nan") if doc["columns"][c][k] is None else doc["columns"][c][k] for c in cols]
              for k in range(n)]
    return t
