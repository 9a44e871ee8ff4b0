"""Seeded random structures and formulas for suites and fuzzing."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .structures import make_structure, tuple_metric
from .syntax import (
    Add, Apply, Const, ConstSym, Dist, Inf, Rel, Scale, Signature, Sup, Var,
)

LIPSCHITZ_CHOICES = (Fraction(1, 2), Fraction(1), Fraction(2))


def _shortest_paths(d):
    n = len(d)
    for k, i, j in itertools.product(range(n), repeat=3):
        if d[i][k] + d[k][j] < d[i][j]:
            d[i][j] = d[i][k] + d[k][j]
    return d


def random_signature(rng, max_relations=2, max_constants=1, max_arity=2, functions=0):
    rels = {}
    for i in range(rng.randint(0, max_relations)):
        rels[f"R{i}"] = (rng.randint(1, max_arity), rng.choice(LIPSCHITZ_CHOICES))
    consts = [f"c{i}" for i in range(rng.randint(0, max_constants))]
    funcs = {f"F{i}": (1, Fraction(1)) for i in range(functions)}
    return Signature.build(consts, funcs, rels)


def random_structure(rng, max_points=4, max_relations=2, max_constants=1, max_arity=2,
                     grid=4, signature=None, min_points=1):
    """A valid exact structure.

    Distances come from a grid of 1/grid steps and are repaired by
    shortest-path completion; relation tables are scaled down until they
    meet their Lipschitz bounds.
    """
    sig = signature or random_signature(rng, max_relations, max_constants, max_arity)
    n = rng.randint(min_points, max_points)
    d = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        d[i][j] = d[j][i] = Fraction(rng.randint(1, grid), grid)
    d = _shortest_paths(d)
    labels = [f"a{i}" for i in range(n)]
    constants = {c: rng.randrange(n) for c in sig.constants}
    functions = {}
    for sym in sig.functions:
        # identity or constant maps are always 1-Lipschitz
        if rng.random() < 0.5:
            functions[sym.name] = {t: t[0] for t in itertools.product(range(n), repeat=sym.arity)}
        else:
            c = rng.randrange(n)
            functions[sym.name] = {t: c for t in itertools.product(range(n), repeat=sym.arity)}
    probe = make_structure(sig, labels, d)
    relations = {}
    for sym in sig.relations:
        tuples = list(itertools.product(range(n), repeat=sym.arity))
        table = {t: Fraction(rng.randint(-grid, grid), grid) for t in tuples}
        ratio = Fraction(0)
        for s, t in itertools.combinations(tuples, 2):
            ratio = max(ratio, abs(table[s] - table[t]) / tuple_metric(probe, s, t))
        if ratio > sym.lipschitz:
            f = sym.lipschitz / ratio
            table = {t: v * f for t, v in table.items()}
        relations[sym.name] = table
    return make_structure(sig, labels, d, constants, functions, relations)


def random_rational(rng, lo=-2, hi=2, dens=(1, 2, 3, 4)):
    q = rng.choice(dens)
    return Fraction(rng.randint(lo * q, hi * q), q)


def random_term(rng, sig, scope, depth=1):
    choices = [Var(v) for v in scope] + [ConstSym(c) for c in sig.constants]
    if depth > 0 and sig.functions and rng.random() < 0.3:
        sym = rng.choice(sig.functions)
        return Apply(sym.name, tuple(random_term(rng, sig, scope, depth - 1) for _ in range(sym.arity)))
    return rng.choice(choices)


def random_formula(rng, sig, variables=("x", "y"), depth=3, qdepth=2, term_depth=1):
    """A formula of depth <= depth with at most qdepth nested quantifiers.

    Bound variables get fresh names z0, z1, ... so nothing is rebound.
    """
    counter = itertools.count()
    return _formula(rng, sig, tuple(variables), depth, qdepth, term_depth, counter)


def _formula(rng, sig, scope, depth, qdepth, tdepth, counter):
    if depth == 0 or rng.random() < 0.2:
        return _atom(rng, sig, scope, tdepth)
    kinds = ["scale", "add"]
    if qdepth > 0:
        kinds += ["sup", "inf"]
    k = rng.choice(kinds)
    if k == "scale":
        r = random_rational(rng)
        if r == 0:
            r = Fraction(1, 2)
        return Scale(r, _formula(rng, sig, scope, depth - 1, qdepth, tdepth, counter))
    if k == "add":
        return Add(_formula(rng, sig, scope, depth - 1, qdepth, tdepth, counter),
                   _formula(rng, sig, scope, depth - 1, qdepth, tdepth, counter))
    v = f"z{next(counter)}"
    body = _formula(rng, sig, scope + (v,), depth - 1, qdepth - 1, tdepth, counter)
    return (Sup if k == "sup" else Inf)(v, body)


def _atom(rng, sig, scope, tdepth):
    r = rng.random()
    if r < 0.15 or not (scope or sig.constants):
        return Const(random_rational(rng))
    if r < 0.55 or not sig.relations:
        return Dist(random_term(rng, sig, scope, tdepth), random_term(rng, sig, scope, tdepth))
    sym = rng.choice(sig.relations)
    return Rel(sym.name, tuple(random_term(rng, sig, scope, tdepth) for _ in range(sym.arity)))
