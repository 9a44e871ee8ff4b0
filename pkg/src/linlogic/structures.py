"""Finite metric L-structures: validation and evaluation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .syntax import (
    Add, Apply, Const, ConstSym, Dist, FreeVarCache, Inf, Rel, Scale, Signature,
    Sup, Var,
)

DEFAULT_EPS = 1e-9


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """A finite metric space with interpretations of every signature symbol.

    ``metric`` is a full square table (so asymmetric inputs can be reported
    by the validator).  Function tables map argument index tuples to a point
    index; relation tables map them to a value.  ``mode`` is ``"exact"``
    (Fractions) or ``"float"`` with absolute tolerance ``eps``.
    """

    signature: Signature
    labels: tuple
    metric: tuple
    constants: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    mode: str = "exact"
    eps: float = DEFAULT_EPS

    @property
    def size(self):
        return len(self.labels)

    @property
    def tolerance(self):
        return 0 if self.mode == "exact" else self.eps

    def point(self, label):
        return self.labels.index(label)

    def d(self, a, b):
        return self.metric[a][b]

    def num(self, x):
        """Coerce a literal to this structure's number type."""
        return Fraction(x) if self.mode == "exact" else float(x)

    def tuples(self, n):
        return itertools.product(range(self.size), repeat=n)


def make_structure(signature, labels, metric, constants=None, functions=None,
                   relations=None, mode="exact", eps=DEFAULT_EPS):
    """Build a structure, coercing numbers to the mode's type.

    ``metric`` may be a full square table or a lower-triangular one.
    """
    n = len(labels)
    conv = Fraction if mode == "exact" else float
    full = [[None] * n for _ in range(n)]
    for i, row in enumerate(metric):
        if len(row) == n:
            for j, v in enumerate(row):
                full[i][j] = conv(v)
        else:
            for j, v in enumerate(row):
                full[i][j] = full[j][i] = conv(v)
            full[i][i] = conv(0) if full[i][i] is None else full[i][i]
    for i in range(n):
        if full[i][i] is None:
            full[i][i] = conv(0)
    rels = {name: {tuple(k): conv(v) for k, v in table.items()}
            for name, table in (relations or {}).items()}
    funcs = {name: {tuple(k): v for k, v in table.items()}
             for name, table in (functions or {}).items()}
    return FiniteStructure(signature, tuple(labels), tuple(tuple(r) for r in full),
                           dict(constants or {}), funcs, rels, mode, eps)


# ------------------------------------------------------------ tuple metric

def tuple_metric(S: FiniteStructure, a, b):
    """sum_i 2^-i d(a_i, b_i), i from 0."""
    if len(a) != len(b):
        raise ValueError(f"tuple lengths differ: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty tuples")
    total = S.num(0)
    for i, (x, y) in enumerate(zip(a, b)):
        total += S.metric[x][y] / 2 ** i
    return total


# ------------------------------------------------------------- validation

@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    values: tuple
    message: str = ""

    def as_dict(self):
        return {"axiom": self.axiom, "witness": list(self.witness),
                "values": [str(v) for v in self.values], "message": self.message}


AXIOMS = (
    "interpretation", "metric-zero", "metric-positivity", "metric-symmetry",
    "metric-triangle", "metric-diameter", "relation-bound", "function-lipschitz",
    "relation-lipschitz",
)


def validate_structure(S: FiniteStructure) -> list:
    """All axiom violations, each with a concrete witness (point labels)."""
    out = []
    eps = S.tolerance
    n = S.size
    L = S.labels
    sig = S.signature
    if n == 0:
        return [Violation("interpretation", (), (), "structure has no points")]
    if len(S.metric) != n or any(len(r) != n for r in S.metric):
        return [Violation("interpretation", (), (), "metric table is not square")]

    for c in sig.constants:
        if c not in S.constants or not 0 <= S.constants[c] < n:
            out.append(Violation("interpretation", (c,), (), f"constant {c} not interpreted"))
    tables_ok = True
    for sym in sig.functions:
        table = S.functions.get(sym.name, {})
        for t in S.tuples(sym.arity):
            if t not in table or not 0 <= table[t] < n:
                out.append(Violation("interpretation", (sym.name,) + tuple(L[i] for i in t), (),
                                     f"function {sym.name} undefined"))
                tables_ok = False
    for sym in sig.relations:
        table = S.relations.get(sym.name, {})
        for t in S.tuples(sym.arity):
            if t not in table:
                out.append(Violation("interpretation", (sym.name,) + tuple(L[i] for i in t), (),
                                     f"relation {sym.name} undefined"))
                tables_ok = False

    d = S.metric
    for a in range(n):
        if abs(d[a][a]) > eps:
            out.append(Violation("metric-zero", (L[a], L[a]), (d[a][a],), "d(a,a) != 0"))
    for a, b in itertools.combinations(range(n), 2):
        if d[a][b] - d[b][a] > eps or d[b][a] - d[a][b] > eps:
            out.append(Violation("metric-symmetry", (L[a], L[b]), (d[a][b], d[b][a]),
                                 "d(a,b) != d(b,a)"))
        for u, v in ((a, b), (b, a)):
            if d[u][v] <= eps:
                out.append(Violation("metric-positivity", (L[u], L[v]), (d[u][v],),
                                     "distinct points at distance <= 0"))
            if d[u][v] > 1 + eps:
                out.append(Violation("metric-diameter", (L[u], L[v]), (d[u][v],), "d(a,b) > 1"))
    for a, b, c in itertools.permutations(range(n), 3):
        if d[a][c] > d[a][b] + d[b][c] + eps:
            out.append(Violation("metric-triangle", (L[a], L[b], L[c]),
                                 (d[a][c], d[a][b], d[b][c]), "d(a,c) > d(a,b) + d(b,c)"))

    if not tables_ok:
        return out
    for sym in sig.relations:
        table = S.relations[sym.name]
        for t in S.tuples(sym.arity):
            if abs(table[t]) > 1 + eps:
                out.append(Violation("relation-bound", (sym.name,) + tuple(L[i] for i in t),
                                     (table[t],), "|R| > 1"))
    for sym in sig.functions + sig.relations:
        is_f = sym in sig.functions
        table = S.functions[sym.name] if is_f else S.relations[sym.name]
        tuples = list(S.tuples(sym.arity))
        for i, s in enumerate(tuples):
            for t in tuples[i + 1:]:
                dist = tuple_metric(S, s, t)
                gap = d[table[s]][table[t]] if is_f else abs(table[s] - table[t])
                if gap > sym.lipschitz * dist + eps:
                    out.append(Violation(
                        "function-lipschitz" if is_f else "relation-lipschitz",
                        (sym.name, tuple(L[k] for k in s), tuple(L[k] for k in t)),
                        (gap, sym.lipschitz * dist),
                        f"{sym.name} moves {gap} > {sym.lipschitz} * {dist}"))
    return out


class InvalidStructure(ValueError):
    def __init__(self, violations):
        self.violations = violations
        first = violations[0]
        super().__init__(f"{len(violations)} violation(s); first: {first.axiom} at {first.witness}")


def require_valid(S):
    report = validate_structure(S)
    if report:
        raise InvalidStructure(report)
    return S


# ------------------------------------------------------------- evaluation

def eval_term(t, S: FiniteStructure, asg: dict) -> int:
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise EvaluationError(f"no assignment for variable {t.name}") from None
    if isinstance(t, ConstSym):
        return S.constants[t.name]
    if isinstance(t, Apply):
        args = tuple(eval_term(a, S, asg) for a in t.args)
        return S.functions[t.func][args]
    raise TypeError(f"not a term: {t!r}")


class Evaluator:
    """Evaluates formulas on one structure, memoizing shared subformulas.

    ``domain`` restricts the range of sup/inf (used to evaluate inside a
    substructure without building it).
    """

    def __init__(self, S: FiniteStructure, domain=None):
        self.S = S
        self.domain = tuple(range(S.size)) if domain is None else tuple(domain)
        self.fv = FreeVarCache()
        self.order = {}
        self.memo = {}

    def __call__(self, phi, asg):
        return self._eval(phi, asg)

    def _eval(self, phi, asg):
        S = self.S
        if isinstance(phi, Const):
            return S.num(phi.value) if S.mode == "float" else phi.value
        if isinstance(phi, Dist):
            return S.metric[eval_term(phi.left, S, asg)][eval_term(phi.right, S, asg)]
        if isinstance(phi, Rel):
            args = tuple(eval_term(a, S, asg) for a in phi.args)
            return S.relations[phi.name][args]
        order = self.order.get(id(phi))
        if order is None:
            order = self.order[id(phi)] = tuple(sorted(self.fv(phi)))
        try:
            key = (id(phi), tuple(asg[v] for v in order))
        except KeyError as e:
            raise EvaluationError(f"no assignment for variable {e.args[0]}") from None
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(phi, Scale):
            val = self._eval(phi.body, asg)
            val = (float(phi.factor) if S.mode == "float" else phi.factor) * val
        elif isinstance(phi, Add):
            val = self._eval(phi.left, asg) + self._eval(phi.right, asg)
        elif isinstance(phi, (Sup, Inf)):
            inner = dict(asg)
            vals = []
            for p in self.domain:
                inner[phi.var] = p
                vals.append(self._eval(phi.body, inner))
            val = max(vals) if isinstance(phi, Sup) else min(vals)
        else:
            raise TypeError(f"not a formula: {phi!r}")
        self.memo[key] = val
        return val


def eval_formula(phi, S: FiniteStructure, asg=None, domain=None):
    """Value of phi in S under asg (variable name -> point index)."""
    return Evaluator(S, domain)(phi, asg or {})
