"""Byte-stable JSON/CSV writers and readers.

Conventions:

* reals are written with 12 significant digits; NaN becomes ``null`` in JSON
  and an empty field in CSV;
* matrices are JSON objects with keys ``basis``, ``dim``, ``entries`` (in that
  order), ``entries`` being rows of ``[re, im]`` pairs;
* count tables are CSV with header ``arm1,arm2,count`` (``arm2`` empty for
  single-photon tables) or JSON with keys ``acquisition_scale``, ``entries``;
* reports keep the key order of the producing object; CSV reports are
  ``key,value`` rows with nested keys joined by dots;
* files are UTF-8 with ``\\n`` line endings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .tomography import CountTable

BASIS_NAMES = {
    "two_qubit": "HH,HV,VH,VV",
    "one_qubit": "H,V",
    "pauli": "I,X,Y,Z",
}


def fmt_real(x) -> str:
    x = float(x)
    if math.isnan(x):
        return ""
    s = format(x, ".12g")
    return "0" if s == "-0" else s


def _round(x):
    x = float(x)
    if math.isnan(x):
        return None
    v = float(format(x, ".12g"))
    return 0.0 if v == 0 else v


def to_jsonable(obj):
    """Recursively convert reports to JSON-ready values with rounded reals."""
    if hasattr(obj, "as_dict"):
        obj = obj.as_dict()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _basis_for(m: np.ndarray, basis: str | None) -> str:
    if basis is not None:
        return BASIS_NAMES.get(basis, basis)
    if m.shape == (2, 2):
        return BASIS_NAMES["one_qubit"]
    raise ValueError("basis must be given for 4x4 matrices ('two_qubit' or 'pauli')")


def matrix_to_dict(m, basis: str | None = None) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "basis": _basis_for(m, basis),
        "dim": int(m.shape[0]),
        "entries": [[[_round(z.real), _round(z.imag)] for z in row] for row in m],
    }


def matrix_from_dict(doc: dict) -> tuple[np.ndarray, str]:
    entries = doc["entries"]
    m = np.array([[complex(re, im) for re, im in row] for row in entries])
    if m.shape != (doc["dim"], doc["dim"]):
        raise ValueError("matrix entries do not match 'dim'")
    return m, doc["basis"]


def matrix_csv(m, basis: str | None = None) -> str:
    m = np.asarray(m, dtype=complex)
    labels = _basis_for(m, basis).split(",")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "re", "im"])
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            w.writerow([a, b, fmt_real(m[i, j].real), fmt_real(m[i, j].imag)])
    return buf.getvalue()


def counts_to_dict(table: CountTable) -> dict:
    return {
        "acquisition_scale": _round(table.acquisition_scale),
        "entries": [
            {"arm1": k[0], "arm2": k[1] if len(k) > 1 else "", "count": _round(v)}
            for k, v in table.entries.items()
        ],
    }


def counts_from_dict(doc: dict) -> CountTable:
    entries = {}
    for e in doc["entries"]:
        key = (e["arm1"], e["arm2"]) if e.get("arm2") else (e["arm1"],)
        entries[key] = e["count"]
    return CountTable(entries, doc["acquisition_scale"])


def counts_csv(table: CountTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arm1", "arm2", "count"])
    for k, v in table.entries.items():
        w.writerow([k[0], k[1] if len(k) > 1 else "", fmt_real(v)])
    return buf.getvalue()


def parse_counts_csv(text: str, acquisition_scale: float | None = None) -> CountTable:
    """Read an ``arm1,arm2,count`` table.

    CSV carries no acquisition scale; unless given, it is estimated by the
    H/V-analyzer total.
    """
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["arm1", "arm2", "count"]:
        raise ValueError(f"count CSV header must be arm1,arm2,count, got {reader.fieldnames}")
    entries = {}
    for row in reader:
        key = (row["arm1"], row["arm2"]) if row["arm2"] else (row["arm1"],)
        entries[key] = float(row["count"])
    table = CountTable(entries, 1.0)
    table.acquisition_scale = acquisition_scale or table.hv_total() or 1.0
    return table


def read_counts(path) -> CountTable:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return counts_from_dict(json.loads(text))
    return parse_counts_csv(text)


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(_flatten(v, key + "."))
        else:
            out.append((key, v))
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_real(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def report_csv(report) -> str:
    doc = report.as_dict() if hasattr(report, "as_dict") else dict(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(doc):
        w.writerow([k, _cell(v)])
    return buf.getvalue()


def table_csv(rows: list) -> str:
    rows = [r.as_dict() if hasattr(r, "as_dict") else r for r in rows]
    if not rows:
        return ""
    header = list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(h)) for h in header])
    return buf.getvalue()


def emit(obj, path, fmt: str = "json", basis: str | None = None) -> Path:
    """Write a matrix, count table, report or list of rows to ``path``."""
    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")
    if isinstance(obj, np.ndarray):
        text = dumps_json(matrix_to_dict(obj, basis)) if fmt == "json" else matrix_csv(obj, basis)
    elif isinstance(obj, CountTable):
        text = dumps_json(counts_to_dict(obj)) if fmt == "json" else counts_csv(obj)
    elif isinstance(obj, list):
        text = dumps_json(obj) if fmt == "json" else table_csv(obj)
    else:
        text = dumps_json(obj) if fmt == "json" else report_csv(obj)
    return _write(path, text)
