"""Signatures, terms, formulas and conditions of linear continuous logic.

Formulas are immutable trees.  Generated formulas may share subtrees, so the
helpers that walk them memoize on node identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

METRIC = "d"


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    lipschitz: Fraction


@dataclass(frozen=True)
class Signature:
    """Constants, Lipschitz function symbols and Lipschitz relation symbols.

    The metric symbol ``d`` is implicit and may not be redeclared.
    """

    constants: tuple = ()
    functions: tuple = ()
    relations: tuple = ()
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        index = {}
        for name in self.constants:
            index.setdefault(name, []).append(("constant", None))
        for sym in self.functions + self.relations:
            kind = "function" if sym in self.functions else "relation"
            if sym.arity < 1:
                raise SignatureError(f"{kind} {sym.name}: arity must be >= 1")
            if sym.lipschitz < 0:
                raise SignatureError(f"{kind} {sym.name}: lipschitz constant must be >= 0")
            index.setdefault(sym.name, []).append((kind, sym))
        for name, entries in index.items():
            if name == METRIC:
                raise SignatureError("the metric symbol d is built in")
            if len(entries) > 1:
                raise SignatureError(f"symbol {name} declared more than once")
        object.__setattr__(self, "_index", {k: v[0] for k, v in index.items()})

    @classmethod
    def build(cls, constants=(), functions=None, relations=None):
        """Convenience constructor: ``functions``/``relations`` map name -> (arity, lipschitz)."""
        fs = tuple(Symbol(n, a, Fraction(l)) for n, (a, l) in (functions or {}).items())
        rs = tuple(Symbol(n, a, Fraction(l)) for n, (a, l) in (relations or {}).items())
        return cls(tuple(constants), fs, rs)

    def kind(self, name):
        entry = self._index.get(name)
        return entry[0] if entry else None

    def function(self, name) -> Symbol:
        kind, sym = self._index.get(name, (None, None))
        if kind != "function":
            raise KeyError(name)
        return sym

    def relation(self, name) -> Symbol:
        kind, sym = self._index.get(name, (None, None))
        if kind != "relation":
            raise KeyError(name)
        return sym

    def is_constant(self, name):
        return self.kind(name) == "constant"


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ConstSym:
    name: str


@dataclass(frozen=True)
class Apply:
    func: str
    args: tuple


Term = Union[Var, ConstSym, Apply]


# ------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Dist:
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple


@dataclass(frozen=True)
class Scale:
    factor: Fraction
    body: "Formula"


@dataclass(frozen=True)
class Add:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Sup:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Inf:
    var: str
    body: "Formula"


Formula = Union[Const, Dist, Rel, Scale, Add, Sup, Inf]
QUANTIFIERS = (Sup, Inf)


@dataclass(frozen=True)
class Condition:
    """``left <= right`` or ``left = right`` (the latter is a pair of inequalities)."""

    left: Formula
    relation: str
    right: Formula

    def __post_init__(self):
        if self.relation not in ("<=", "="):
            raise ValueError(f"bad condition relation {self.relation!r}")

    def inequalities(self):
        if self.relation == "<=":
            return [(self.left, self.right)]
        return [(self.left, self.right), (self.right, self.left)]


def const(r) -> Const:
    return Const(Fraction(r))


def linear_combination(coeffs, formulas) -> Formula:
    """Formula for sum(c * phi); zero coefficients are dropped, unit ones unscaled."""
    out = None
    for c, phi in zip(coeffs, formulas):
        c = Fraction(c)
        if c == 0:
            continue
        term = phi if c == 1 else Scale(c, phi)
        out = term if out is None else Add(out, term)
    return out if out is not None else Const(Fraction(0))


# --------------------------------------------------------------- walking

def term_variables(t: Term, out: list):
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, Apply):
        for a in t.args:
            term_variables(a, out)


def free_variables(phi: Formula) -> list:
    """Free variables in order of first occurrence."""
    out = []
    _free(phi, frozenset(), out, set())
    return out


def _free(phi, bound, out, seen):
    key = (id(phi), bound)
    if key in seen:
        return
    seen.add(key)
    if isinstance(phi, Const):
        return
    if isinstance(phi, Dist):
        ts = (phi.left, phi.right)
    elif isinstance(phi, Rel):
        ts = phi.args
    elif isinstance(phi, Scale):
        _free(phi.body, bound, out, seen)
        return
    elif isinstance(phi, Add):
        _free(phi.left, bound, out, seen)
        _free(phi.right, bound, out, seen)
        return
    elif isinstance(phi, QUANTIFIERS):
        _free(phi.body, bound | {phi.var}, out, seen)
        return
    else:
        raise TypeError(f"not a formula: {phi!r}")
    names = []
    for t in ts:
        term_variables(t, names)
    for n in names:
        if n not in bound and n not in out:
            out.append(n)


class FreeVarCache:
    """Memoized free-variable sets keyed on node identity (for shared DAGs)."""

    def __init__(self):
        self._cache = {}
        self._keep = []

    def __call__(self, phi) -> frozenset:
        key = id(phi)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if isinstance(phi, Const):
            fv = frozenset()
        elif isinstance(phi, Dist):
            names = []
            term_variables(phi.left, names)
            term_variables(phi.right, names)
            fv = frozenset(names)
        elif isinstance(phi, Rel):
            names = []
            for t in phi.args:
                term_variables(t, names)
            fv = frozenset(names)
        elif isinstance(phi, Scale):
            fv = self(phi.body)
        elif isinstance(phi, Add):
            fv = self(phi.left) | self(phi.right)
        else:
            fv = self(phi.body) - {phi.var}
        self._cache[key] = fv
        self._keep.append(phi)
        return fv


def rename_free(phi: Formula, mapping: dict, memo=None) -> Formula:
    """Rename free variables.  Bound variables must not clash with targets."""
    if memo is None:
        memo = {}
    return _rename(phi, mapping, memo)


def _rename_term(t, mapping):
    if isinstance(t, Var):
        new = mapping.get(t.name)
        return Var(new) if new is not None else t
    if isinstance(t, Apply):
        args = tuple(_rename_term(a, mapping) for a in t.args)
        return t if args == t.args else Apply(t.func, args)
    return t


def _rename(phi, mapping, memo):
    # unchanged subtrees are returned as the same object, keeping sharing intact
    key = id(phi)
    if key in memo:
        return memo[key][1]
    if isinstance(phi, Const):
        out = phi
    elif isinstance(phi, Dist):
        left, right = _rename_term(phi.left, mapping), _rename_term(phi.right, mapping)
        out = phi if (left, right) == (phi.left, phi.right) else Dist(left, right)
    elif isinstance(phi, Rel):
        args = tuple(_rename_term(a, mapping) for a in phi.args)
        out = phi if args == phi.args else Rel(phi.name, args)
    elif isinstance(phi, Scale):
        body = _rename(phi.body, mapping, memo)
        out = phi if body is phi.body else Scale(phi.factor, body)
    elif isinstance(phi, Add):
        left, right = _rename(phi.left, mapping, memo), _rename(phi.right, mapping, memo)
        out = phi if left is phi.left and right is phi.right else Add(left, right)
    else:
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        body = _rename(phi.body, inner, {}) if inner != mapping else _rename(phi.body, mapping, memo)
        out = phi if body is phi.body else type(phi)(phi.var, body)
    memo[key] = (phi, out)
    return out


def formula_size(phi: Formula) -> int:
    """Number of distinct nodes (DAG size)."""
    seen = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if id(f) in seen:
            continue
        seen.add(id(f))
        if isinstance(f, (Scale, Sup, Inf)):
            stack.append(f.body)
        elif isinstance(f, Add):
            stack.extend((f.left, f.right))
    return len(seen)


# ---------------------------------------------------------- well-formedness

class FormulaError(ValueError):
    pass


def check_term(t: Term, sig: Signature):
    if isinstance(t, Var):
        return
    if isinstance(t, ConstSym):
        if not sig.is_constant(t.name):
            raise FormulaError(f"unknown constant {t.name}")
        return
    try:
        sym = sig.function(t.func)
    except KeyError:
        raise FormulaError(f"unknown function {t.func}") from None
    if len(t.args) != sym.arity:
        raise FormulaError(f"{t.func} expects {sym.arity} arguments, got {len(t.args)}")
    for a in t.args:
        check_term(a, sig)


def check_formula(phi: Formula, sig: Signature, bound=frozenset()):
    """Raise FormulaError unless phi is well formed over sig."""
    if isinstance(phi, Const):
        return
    if isinstance(phi, Dist):
        check_term(phi.left, sig)
        check_term(phi.right, sig)
    elif isinstance(phi, Rel):
        try:
            sym = sig.relation(phi.name)
        except KeyError:
            raise FormulaError(f"unknown relation {phi.name}") from None
        if len(phi.args) != sym.arity:
            raise FormulaError(f"{phi.name} expects {sym.arity} arguments, got {len(phi.args)}")
        for a in phi.args:
            check_term(a, sig)
    elif isinstance(phi, Scale):
        check_formula(phi.body, sig, bound)
    elif isinstance(phi, Add):
        check_formula(phi.left, sig, bound)
        check_formula(phi.right, sig, bound)
    elif isinstance(phi, QUANTIFIERS):
        if phi.var in bound:
            raise FormulaError(f"variable {phi.var} rebound inside its own scope")
        check_formula(phi.body, sig, bound | {phi.var})
    else:
        raise TypeError(f"not a formula: {phi!r}")


# --------------------------------------------------------------- bounds

def _term_lipschitz(t: Term, sig: Signature) -> dict:
    if isinstance(t, Var):
        return {t.name: Fraction(1)}
    if isinstance(t, ConstSym):
        return {}
    sym = sig.function(t.func)
    return _weighted_args(t.args, sym.lipschitz, sig)


def _weighted_args(args, lam, sig):
    # tuple metric weights 2^-i, i from 0
    out = {}
    for i, a in enumerate(args):
        for v, l in _term_lipschitz(a, sig).items():
            out[v] = out.get(v, 0) + lam * l / 2 ** i
    return out


def syntactic_bounds(phi: Formula, sig: Signature):
    """Conservative (bound, per-variable Lipschitz constants) for phi.

    Lipschitz constants are with respect to moving a single variable.
    """
    return _bounds(phi, sig, {})


def _bounds(phi, sig, memo):
    key = id(phi)
    if key in memo:
        return memo[key][1]
    if isinstance(phi, Const):
        out = (abs(phi.value), {})
    elif isinstance(phi, Dist):
        lam = dict(_term_lipschitz(phi.left, sig))
        for v, l in _term_lipschitz(phi.right, sig).items():
            lam[v] = lam.get(v, 0) + l
        out = (Fraction(1), lam)
    elif isinstance(phi, Rel):
        sym = sig.relation(phi.name)
        out = (Fraction(1), _weighted_args(phi.args, sym.lipschitz, sig))
    elif isinstance(phi, Scale):
        b, lam = _bounds(phi.body, sig, memo)
        r = abs(phi.factor)
        out = (r * b, {v: r * l for v, l in lam.items()})
    elif isinstance(phi, Add):
        b1, l1 = _bounds(phi.left, sig, memo)
        b2, l2 = _bounds(phi.right, sig, memo)
        lam = dict(l1)
        for v, l in l2.items():
            lam[v] = lam.get(v, 0) + l
        out = (b1 + b2, lam)
    else:
        b, lam = _bounds(phi.body, sig, memo)
        out = (b, {v: l for v, l in lam.items() if v != phi.var})
    out = (out[0], {v: l for v, l in out[1].items() if l != 0})
    memo[key] = (phi, out)
    return out
