"""JSON and table rendering of command reports."""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

SCHEMA_KEYS = ("command", "inputs", "fragment", "results", "certificates", "counterexamples",
               "timing_ms")


def rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def to_jsonable(obj):
    """Fractions become "p/q"; tuples become lists; numpy scalars become Python numbers."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "numerator") and hasattr(obj, "denominator"):
        return rational(Fraction(int(obj.numerator), int(obj.denominator)))
    return str(obj)


def make_report(command, inputs=None, fragment=None, results=None, certificates=None,
                counterexamples=None, timing_ms=0):
    return {"command": command, "inputs": inputs or {}, "fragment": fragment or {},
            "results": results or {}, "certificates": certificates or [],
            "counterexamples": counterexamples or [], "timing_ms": timing_ms}


def emit_report(report, fmt="table") -> str:
    data = to_jsonable({k: report.get(k) for k in SCHEMA_KEYS})
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    return render_table(data)


def _cell(v):
    if isinstance(v, list):
        return "(" + ", ".join(_cell(x) for x in v) + ")"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _rows(name, rows):
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    cells = [[_cell(r.get(c, "")) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    out = [f"{name}:"]
    out.append("  " + "  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
    for row in cells:
        out.append("  " + "  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return out


def _section(title, body, indent="  "):
    out = []
    if isinstance(body, dict):
        if not body:
            return out
        out.append(f"{title}:")
        width = max(len(k) for k in body)
        for k, v in body.items():
            if isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
                out += [indent + line for line in _rows(k, v)]
            elif isinstance(v, dict):
                out += [indent + line for line in _section(k, v)]
            else:
                out.append(f"{indent}{k.ljust(width)}  {_cell(v)}")
    elif isinstance(body, list):
        if not body:
            return out
        if all(isinstance(x, dict) for x in body):
            out += _rows(title, [{k: (json.dumps(v) if isinstance(v, (dict,)) else v)
                                  for k, v in x.items()} for x in body])
        else:
            out.append(f"{title}: {_cell(body)}")
    return out


def render_table(data) -> str:
    lines = [f"command: {data['command']}"]
    for key in ("inputs", "fragment", "results", "certificates", "counterexamples"):
        lines += _section(key, data[key])
    return "\n".join(lines) + "\n"
