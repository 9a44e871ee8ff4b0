"""Plain-text structure files.

    SIGNATURE
    constant c0
    relation P 1 lipschitz 1
    function F 1 lipschitz 1/2
    POINTS
    a0 a1
    METRIC
    1                # lower-triangular rows, diagonal optional
    INTERP
    c0 = a0
    P a0 = 0
    F a0 = a1
    MODE
    exact            # or: float 1e-9

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from fractions import Fraction

from .structures import DEFAULT_EPS, make_structure, require_valid
from .syntax import Signature, SignatureError, Symbol

SECTIONS = ("SIGNATURE", "POINTS", "METRIC", "INTERP", "MODE")


class StructureFileError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def _number(text, mode, line):
    try:
        return Fraction(text) if mode == "exact" else float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise StructureFileError(f"bad number {text!r}", line) from None


def parse_structure_text(text, validate=True):
    sections = {name: [] for name in SECTIONS}
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.upper() in SECTIONS and line.isupper():
            current = line
            continue
        if current is None:
            raise StructureFileError("content before the first section header", no)
        sections[current].append((no, line))
    if not sections["POINTS"]:
        raise StructureFileError("no POINTS section")

    mode, eps = "exact", DEFAULT_EPS
    for no, line in sections["MODE"]:
        parts = line.split()
        if parts[0] == "exact" and len(parts) == 1:
            mode = "exact"
        elif parts[0] == "float" and len(parts) <= 2:
            mode = "float"
            if len(parts) == 2:
                eps = float(parts[1])
        else:
            raise StructureFileError(f"bad mode line {line!r}", no)

    constants, functions, relations = [], [], []
    for no, line in sections["SIGNATURE"]:
        parts = line.split()
        if parts[0] == "constant" and len(parts) == 2:
            constants.append(parts[1])
        elif parts[0] in ("relation", "function") and len(parts) == 5 and parts[3] == "lipschitz":
            try:
                sym = Symbol(parts[1], int(parts[2]), Fraction(parts[4]))
            except ValueError:
                raise StructureFileError(f"bad declaration {line!r}", no) from None
            (relations if parts[0] == "relation" else functions).append(sym)
        else:
            raise StructureFileError(f"bad declaration {line!r}", no)
    try:
        sig = Signature(tuple(constants), tuple(functions), tuple(relations))
    except SignatureError as e:
        raise StructureFileError(str(e)) from None

    labels = [tok for _, line in sections["POINTS"] for tok in line.split()]
    if len(set(labels)) != len(labels):
        raise StructureFileError("duplicate point labels")
    where = {a: i for i, a in enumerate(labels)}

    def point(name, no):
        if name not in where:
            raise StructureFileError(f"unknown point {name!r}", no)
        return where[name]

    rows = [[_number(t, mode, no) for t in line.split()] for no, line in sections["METRIC"]]
    n = len(labels)
    if len(rows) == n - 1 and all(len(r) == i + 1 for i, r in enumerate(rows)):
        rows = [[]] + rows           # strict lower triangle; its first row is empty
    if len(rows) != n:
        raise StructureFileError(f"METRIC has {len(rows)} rows for {n} points")
    full = [[0] * n for _ in range(n)]
    for i, row in enumerate(rows):
        if len(row) not in (i, i + 1):
            raise StructureFileError(f"METRIC row {i} has {len(row)} entries")
        for j in range(i):
            full[i][j] = full[j][i] = row[j]
        if len(row) == i + 1:
            full[i][i] = row[i]

    const_map, func_tables, rel_tables = {}, {s.name: {} for s in functions}, {s.name: {} for s in relations}
    for no, line in sections["INTERP"]:
        if "=" not in line:
            raise StructureFileError(f"bad interpretation {line!r}", no)
        lhs, rhs = (s.strip() for s in line.split("=", 1))
        parts = lhs.split()
        kind = sig.kind(parts[0])
        if kind == "constant" and len(parts) == 1:
            const_map[parts[0]] = point(rhs, no)
        elif kind in ("function", "relation"):
            sym = sig.function(parts[0]) if kind == "function" else sig.relation(parts[0])
            if len(parts) - 1 != sym.arity:
                raise StructureFileError(f"{sym.name} expects {sym.arity} arguments", no)
            args = tuple(point(a, no) for a in parts[1:])
            if kind == "function":
                func_tables[sym.name][args] = point(rhs, no)
            else:
                rel_tables[sym.name][args] = _number(rhs, mode, no)
        else:
            raise StructureFileError(f"unknown symbol in {line!r}", no)

    S = make_structure(sig, labels, full, const_map, func_tables, rel_tables, mode, eps)
    return require_valid(S) if validate else S


def load_structure(path, validate=True):
    with open(path, encoding="utf-8") as fh:
        return parse_structure_text(fh.read(), validate)


def _fmt(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def format_structure(S) -> str:
    sig = S.signature
    out = ["SIGNATURE"]
    out += [f"constant {c}" for c in sig.constants]
    out += [f"relation {s.name} {s.arity} lipschitz {_fmt(s.lipschitz)}" for s in sig.relations]
    out += [f"function {s.name} {s.arity} lipschitz {_fmt(s.lipschitz)}" for s in sig.functions]
    out += ["POINTS", " ".join(S.labels), "METRIC"]
    for i in range(S.size):
        out.append(" ".join(_fmt(S.metric[i][j]) for j in range(i + 1)))
    out.append("INTERP")
    L = S.labels
    for c in sig.constants:
        out.append(f"{c} = {L[S.constants[c]]}")
    for s in sig.relations:
        for args, v in sorted(S.relations[s.name].items()):
            out.append(f"{s.name} {' '.join(L[a] for a in args)} = {_fmt(v)}")
    for s in sig.functions:
        for args, v in sorted(S.functions[s.name].items()):
            out.append(f"{s.name} {' '.join(L[a] for a in args)} = {L[v]}")
    out += ["MODE", "exact" if S.mode == "exact" else f"float {S.eps!r}"]
    return "\n".join(out) + "\n"
