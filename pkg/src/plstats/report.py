"""Deterministic JSON and CSV writers.

JSON keys are sorted and floats carry 17 significant digits, so equal
inputs give byte-identical files.  Non-finite floats become the strings
"nan", "inf" or "-inf", and any report containing one gets ``pass: false``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-ready builtins."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _has_nonfinite(obj) -> bool:
    if isinstance(obj, float):
        return not math.isfinite(obj)
    if isinstance(obj, dict):
        return any(_has_nonfinite(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_has_nonfinite(v) for v in obj)
    return False


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _dump(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _dump(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _dump(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif obj is None:
        out.append("null")
    else:
        out.append(json.dumps(obj))


def to_json(report: dict, indent: int = 2) -> str:
    data = _plain(report)
    if isinstance(data, dict) and _has_nonfinite(data):
        data["pass"] = False
    out: list[str] = []
    _dump(data, indent, 0, out)
    return "".join(out) + "\n"


def samples_csv(values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["replication", "value"])
    for r, v in enumerate(np.asarray(values, dtype=float).tolist()):
        w.writerow([r, format_float(v).strip('"')])
    return buf.getvalue()


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(x).strip('"') if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def read_samples_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["replication", "value"]:
        raise ValueError(f"{path}: expected header 'replication,value'")
    return np.array([float(r[1]) for r in rows[1:]], dtype=float)


def emit_report(report: dict, fmt: str, path, samples: dict | None = None) -> list[Path]:
    """Write report.json and/or <name>.csv files into directory ``path``."""
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"format must be json, csv or both, got {fmt!r}")
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = d / "report.json"
        p.write_text(to_json(report))
        written.append(p)
    if fmt in ("csv", "both"):
        for name, values in sorted((samples or {}).items()):
            p = d / f"{name}.csv"
            p.write_text(samples_csv(values))
            written.append(p)
    return written
