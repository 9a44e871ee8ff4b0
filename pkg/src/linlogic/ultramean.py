"""Ultrameans of finite structures over finitely additive probability charges.

On a finite index set a charge is just a weight vector, and the 0-1 valued
ones (ultrafilters) are point masses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .structures import (
    FiniteStructure, InvalidStructure, eval_formula, require_valid,
    validate_structure,
)
from .syntax import free_variables


@dataclass(frozen=True)
class Charge:
    weights: tuple

    def __post_init__(self):
        if not self.weights:
            raise ValueError("a charge needs at least one index")
        if any(w < 0 for w in self.weights):
            raise ValueError("charge weights must be nonnegative")
        total = sum(self.weights)
        exact = all(isinstance(w, (int, Fraction)) for w in self.weights)
        if (total != 1) if exact else abs(total - 1) > 1e-12:
            raise ValueError(f"charge weights sum to {total}, not 1")

    @classmethod
    def of(cls, *weights):
        return cls(tuple(w if isinstance(w, float) else Fraction(w) for w in weights))

    @classmethod
    def point_mass(cls, m, j):
        return cls(tuple(Fraction(int(i == j)) for i in range(m)))

    @property
    def size(self):
        return len(self.weights)


def integrate(mu: Charge, values):
    """Integral of a function on the index set: sum w_i v_i."""
    if len(values) != mu.size:
        raise ValueError(f"{len(values)} values for a charge on {mu.size} indices")
    total = 0
    for w, v in zip(mu.weights, values):
        if w:
            total = total + w * v
    return total


@dataclass(frozen=True, eq=False)
class UltrameanResult:
    structure: FiniteStructure
    classes: dict          # factor tuple -> class index
    representatives: tuple  # class index -> lexicographically least factor tuple
    factors: tuple
    charge: Charge

    def class_of(self, factor_tuple):
        return self.classes[tuple(factor_tuple)]


def _mode(factors, mu):
    if any(S.mode == "float" for S in factors) or any(isinstance(w, float) for w in mu.weights):
        return "float", max(S.eps for S in factors)
    return "exact", factors[0].eps


def build_ultramean(factors, mu: Charge, check=True) -> UltrameanResult:
    """Quotient of the product by the integrated pseudo-metric.

    ``check`` validates the factors and the result (quadratic in the number
    of tuples for each relation, so bulk callers may switch it off).
    """
    factors = tuple(factors)
    if not factors:
        raise ValueError("need at least one factor")
    if len(factors) != mu.size:
        raise ValueError(f"{len(factors)} factors for a charge on {mu.size} indices")
    sig = factors[0].signature
    if any(S.signature != sig for S in factors):
        raise ValueError("factors are over different signatures")
    if check:
        for S in factors:
            require_valid(S)
    mode, eps = _mode(factors, mu)
    tol = 0 if mode == "exact" else eps
    weights = mu.weights if mode == "exact" else tuple(float(w) for w in mu.weights)

    product = list(itertools.product(*(range(S.size) for S in factors)))

    mu_w = _Weights(weights)

    def dist(u, v):
        return mu_w.integrate([S.metric[a][b] for S, a, b in zip(factors, u, v)])

    classes = {}
    reps = []
    for u in product:
        for ci, r in enumerate(reps):
            if dist(u, r) <= tol:
                classes[u] = ci
                break
        else:
            classes[u] = len(reps)
            reps.append(u)

    def label(u):
        return "[" + "".join(S.labels[a] for S, a in zip(factors, u)) + "]"

    k = len(reps)
    zero = Fraction(0) if mode == "exact" else 0.0
    metric = [[zero] * k for _ in range(k)]
    for i, j in itertools.combinations(range(k), 2):
        metric[i][j] = metric[j][i] = dist(reps[i], reps[j]) + zero
    constants = {c: classes[tuple(S.constants[c] for S in factors)] for c in sig.constants}
    functions = {}
    for sym in sig.functions:
        table = {}
        for args in itertools.product(range(k), repeat=sym.arity):
            image = tuple(S.functions[sym.name][tuple(reps[a][i] for a in args)]
                          for i, S in enumerate(factors))
            table[args] = classes[image]
        functions[sym.name] = table
    relations = {}
    for sym in sig.relations:
        table = {}
        for args in itertools.product(range(k), repeat=sym.arity):
            vals = [S.relations[sym.name][tuple(reps[a][i] for a in args)]
                    for i, S in enumerate(factors)]
            table[args] = mu_w.integrate(vals) + zero
        relations[sym.name] = table
    U = FiniteStructure(sig, tuple(label(r) for r in reps), tuple(tuple(r) for r in metric),
                        constants, functions, relations, mode, eps)
    if check:
        report = validate_structure(U)
        if report:
            raise InvalidStructure(report)
    return UltrameanResult(U, classes, tuple(reps), factors, mu)


class _Weights:
    def __init__(self, weights):
        self.weights = weights

    def integrate(self, values):
        total = 0
        for w, v in zip(self.weights, values):
            if w:
                total = total + w * v
        return total


def check_los(phi, factors, mu: Charge, assignment: dict, ultramean: UltrameanResult = None):
    """Compare phi on the ultramean with the integral of phi over the factors.

    ``assignment`` maps each free variable to a factor tuple (a member of
    its class).  Returns ``(lhs, rhs, equal)``; equality is exact in exact
    mode and within the structure tolerance in float mode.
    """
    if ultramean is None:
        ultramean = build_ultramean(factors, mu)
    fv = free_variables(phi)
    missing = [v for v in fv if v not in assignment]
    if missing:
        raise ValueError(f"no class given for {', '.join(missing)}")
    U = ultramean.structure
    reps = {v: tuple(assignment[v]) for v in fv}
    for v, t in reps.items():
        if len(t) != len(ultramean.factors):
            raise ValueError(f"class tuple for {v} has length {len(t)}, expected {len(ultramean.factors)}")
    lhs = eval_formula(phi, U, {v: ultramean.class_of(t) for v, t in reps.items()})
    per_factor = [eval_formula(phi, S, {v: t[i] for v, t in reps.items()})
                  for i, S in enumerate(ultramean.factors)]
    weights = mu.weights if U.mode == "exact" else tuple(float(w) for w in mu.weights)
    rhs = _Weights(weights).integrate(per_factor)
    equal = lhs == rhs if U.mode == "exact" else abs(lhs - rhs) <= U.eps
    return lhs, rhs, equal
