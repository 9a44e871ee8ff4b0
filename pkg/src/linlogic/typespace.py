"""Fragments of the formula space, realized type vectors and their geometry.

A fragment assigns to each context size m a linearly independent list of
formulas in the variables x1..xm, each with its value table over M^m.
A type vector of a tuple is the list of basis values at that tuple.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from .convex import (
    LinearConstraint, extreme_subset, is_face_region, same_point,
)
from .structures import Evaluator, FiniteStructure, tuple_metric
from .syntax import (
    Apply, Condition, Const, ConstSym, Dist, Inf, Rel, Sup, Var, free_variables,
    linear_combination, rename_free,
)

MODES = ("listed", "enumerated", "saturated")
ALIASES = ("x", "y", "z", "w")
FLOAT_RANK_TOL = 1e-8

# coefficients with denominators at most 4
COEFF_POOL = tuple(sorted({s * Fraction(p, q) for q in (1, 2, 3, 4) for p in range(1, q + 1)
                           for s in (1, -1)}))


class FragmentError(ValueError):
    pass


def context_variables(m):
    return tuple(f"x{i}" for i in range(1, m + 1))


@dataclass(frozen=True)
class FragmentParams:
    mode: str = "saturated"
    depth: int = 2
    rounds: int = 8
    samples: int = 32
    seed: int = 0
    extra: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise FragmentError(f"unknown fragment mode {self.mode!r}")
        if self.depth < 0 or self.rounds < 0 or self.samples < 0 or self.extra < 0:
            raise FragmentError("fragment parameters must be nonnegative")

    def as_dict(self):
        return {"mode": self.mode, "depth": self.depth, "rounds": self.rounds,
                "samples": self.samples, "seed": self.seed, "extra": self.extra}


# ------------------------------------------------------------------ tables

def _dtype(S):
    return object if S.mode == "exact" else float


def _grid(S, m):
    """Row-major index grid: column t lists the coordinates of tuple t."""
    if m == 0:
        return np.zeros((0, 1), dtype=int)
    return np.indices((S.size,) * m).reshape(m, -1)


def tuple_index(S, tup):
    idx = 0
    for a in tup:
        idx = idx * S.size + a
    return idx


def formula_table(phi, S, variables, domain=None, evaluator=None):
    """Values of phi at every tuple of M^m (m = len(variables)), row-major."""
    ev = evaluator or Evaluator(S, domain)
    out = [ev(phi, dict(zip(variables, t))) for t in itertools.product(range(S.size), repeat=len(variables))]
    return np.array(out, dtype=_dtype(S))


def _fraction(q):
    return Fraction(int(q.numerator), int(q.denominator))


def _is_zero(x, tol):
    return x == 0 if tol == 0 else abs(x) <= tol


class _Echelon:
    """Incremental row echelon form, optionally tracking combinations."""

    def __init__(self, tol):
        self.tol = tol
        self.rows = []
        self.pivots = []
        self.combos = []

    def _coerce(self, v):
        # exact rows run on gmpy2 rationals, far cheaper than Fraction
        if self.tol == 0:
            return np.array([mpq(x) for x in v], dtype=object)
        return np.asarray(v, dtype=float).copy()

    def reduce(self, v, combo=None):
        v = self._coerce(v)
        for p, row, c in zip(self.pivots, self.rows, self.combos):
            f = v[p]
            if not _is_zero(f, 0):
                v = v - f * row
                if combo is not None:
                    for k, val in c.items():
                        combo[k] = combo.get(k, 0) + f * val
        return v, combo

    def add(self, v, tag=None):
        """Add v if independent of the rows so far; report whether it was."""
        r, combo = self.reduce(v, {} if tag is not None else None)
        if self.tol == 0:
            nz = np.flatnonzero(r != 0)
            if not len(nz):
                return False
            p = int(nz[0])
        else:
            r = r.astype(float)
            p = int(np.argmax(np.abs(r)))
            scale = max(1.0, float(np.max(np.abs(np.asarray(v, dtype=float)))))
            if abs(r[p]) <= self.tol * scale:
                return False
        piv = r[p]
        self.rows.append(r / piv)
        self.pivots.append(p)
        if tag is not None:
            # row = (v - sum f_k row_k) / piv, with v = basis element ``tag``
            c = {k: -val / piv for k, val in combo.items()}
            c[tag] = c.get(tag, 0) + 1 / piv
            self.combos.append(c)
        else:
            self.combos.append({})
        return True


@dataclass(eq=False)
class Context:
    arity: int
    variables: tuple
    formulas: list
    tables: np.ndarray   # shape (dim, |M|^arity)
    lifted: int = 0
    extras: list = field(default_factory=list)  # quantified (formula, table) pairs kept for elementarity
    tol: float = 0
    _tracker: object = None

    @property
    def dim(self):
        return len(self.formulas)

    def column(self, index):
        return tuple(self.tables[:, index].tolist())

    def span_coefficients(self, table):
        """Coefficients c with sum c_i basis_i = table, or None."""
        if self._tracker is None:
            ech = _Echelon(self.tol)
            for i, row in enumerate(self.tables):
                ech.add(row, tag=i)
            self._tracker = ech
        r, combo = self._tracker.reduce(table, {})
        if self.tol == 0:
            if any(x != 0 for x in r):
                return None
        elif np.max(np.abs(r.astype(float))) > max(self.tol, 1e-7):
            return None
        if self.tol == 0:
            return tuple(_fraction(combo.get(i, 0)) for i in range(self.dim))
        return tuple(float(combo.get(i, 0)) for i in range(self.dim))


@dataclass(eq=False)
class Fragment:
    structure: FiniteStructure
    n: int
    params: FragmentParams
    contexts: dict
    saturated: bool
    rounds_run: int = 0
    sentences: list = field(default_factory=list)  # (formula, value)

    def context(self, m) -> Context:
        try:
            return self.contexts[m]
        except KeyError:
            raise FragmentError(f"fragment has no context of size {m} "
                                f"(available: {sorted(self.contexts)})") from None

    @property
    def dims(self):
        return {m: c.dim for m, c in sorted(self.contexts.items())}

    @property
    def generated(self):
        return self.params.mode != "listed"

    def summary(self):
        return {"contexts": sorted(self.contexts), "dims": {str(m): d for m, d in self.dims.items()},
                "saturated": self.saturated, "mode": self.params.mode, "rounds": self.rounds_run}


# ------------------------------------------------------------- generation

def term_closure(S: FiniteStructure, m, depth=2, variables=None):
    """Distinct term functions M^m -> M up to the depth cap.

    Returns a list of (term, table) with tables as integer arrays.
    """
    variables = variables or context_variables(m)
    grid = _grid(S, m)
    n = grid.shape[1]
    seen = {}
    out = []

    def offer(term, table):
        key = table.tobytes()
        if key not in seen:
            seen[key] = term
            out.append((term, table))
            return True
        return False

    for i, v in enumerate(variables):
        offer(Var(v), grid[i].copy())
    for c in S.signature.constants:
        offer(ConstSym(c), np.full(n, S.constants[c], dtype=int))
    for _ in range(depth):
        added = False
        current = list(out)
        for sym in S.signature.functions:
            tab = S.functions[sym.name]
            for args in itertools.product(current, repeat=sym.arity):
                table = np.array([tab[tuple(int(a[1][t]) for a in args)] for t in range(n)], dtype=int)
                added |= offer(Apply(sym.name, tuple(a[0] for a in args)), table)
        if not added:
            break
    return out


def atomic_formulas(S: FiniteStructure, m, depth=2):
    """Distance and relation atoms over the term closure, with tables."""
    dt = _dtype(S)
    terms = term_closure(S, m, depth)
    metric = np.array(S.metric, dtype=dt)
    out = []
    for sym in S.signature.relations:
        rel = np.empty((S.size,) * sym.arity, dtype=dt)
        for k, v in S.relations[sym.name].items():
            rel[k] = v
        for args in itertools.product(terms, repeat=sym.arity):
            out.append((Rel(sym.name, tuple(t for t, _ in args)), rel[tuple(tab for _, tab in args)]))
    for (t1, a), (t2, b) in itertools.combinations(terms, 2):
        out.append((Dist(t1, t2), metric[a, b]))
    return out


def _ones(S, n):
    one = Fraction(1) if S.mode == "exact" else 1.0
    return np.array([one] * n, dtype=_dtype(S))


def _swap_table(table, size, m, j):
    return np.swapaxes(table.reshape((size,) * m), j, j + 1).reshape(-1)


def _build_context(S, m, tol, lower, sources):
    ech = _Echelon(tol)
    formulas, tables = [], []

    def offer(f, t):
        if ech.add(t):
            formulas.append(f)
            tables.append(t)

    if lower is None:
        offer(Const(Fraction(1)), _ones(S, S.size ** m))
    else:
        for f, t in zip(lower.formulas, lower.tables):
            offer(f, np.repeat(t, S.size))
    lifted = len(formulas)
    for f, t in sources:
        offer(f, t)
    names = context_variables(m)
    i = 0
    while i < len(formulas):
        for j in range(m - 1):
            t2 = _swap_table(tables[i], S.size, m, j)
            if ech.add(t2):
                formulas.append(rename_free(formulas[i], {names[j]: names[j + 1], names[j + 1]: names[j]}))
                tables.append(t2)
        i += 1
    arr = np.array(tables, dtype=_dtype(S)).reshape(len(tables), S.size ** m)
    return Context(m, names, formulas, arr, lifted, tol=tol)


def _quantify(S, upper: Context, samples, rng, fresh):
    """sup/inf over the last variable of basis elements and random combinations."""
    last = upper.variables[-1]
    exact = S.mode == "exact"
    items = [(upper.formulas[i], upper.tables[i]) for i in range(upper.lifted, upper.dim)]
    free = [i for i in range(upper.dim) if not isinstance(upper.formulas[i], Const)]
    if exact and free and samples:
        rows = np.array([[mpq(x) for x in upper.tables[i]] for i in free], dtype=object)
    else:
        rows = upper.tables[free]
    for _ in range(samples if free else 0):
        coeffs = [rng.choice(COEFF_POOL) for _ in free]
        if exact:
            vals = np.array([mpq(c) for c in coeffs], dtype=object) @ rows
            table = np.array([_fraction(q) for q in vals], dtype=object)
        else:
            table = np.array([float(c) for c in coeffs]) @ rows
        items.append((linear_combination(coeffs, [upper.formulas[i] for i in free]), table))
    out = []
    for f, t in items:
        grid = t.reshape(-1, S.size)
        u = f"u{next(fresh)}"
        body = rename_free(f, {last: u})
        out.append((Sup(u, body), grid.max(axis=1)))
        out.append((Inf(u, body), grid.min(axis=1)))
    return out


def generate_fragment(S: FiniteStructure, n, params: FragmentParams = None, formulas=None,
                      variables=None) -> Fragment:
    """Build a fragment with contexts 1..n+extra (listed mode: just n)."""
    params = params or FragmentParams()
    if n < 1:
        raise FragmentError("n must be at least 1")
    if params.mode == "listed":
        return _listed(S, n, formulas or [], params, variables)
    tol = 0 if S.mode == "exact" else FLOAT_RANK_TOL
    top = n + params.extra
    atoms = {m: atomic_formulas(S, m, params.depth) for m in range(1, top + 1)}
    samples = params.samples if params.mode == "saturated" else 0
    rng = random.Random(params.seed)
    fresh = itertools.count(1)
    quantified = {m: [] for m in range(top + 1)}
    prev = {}
    saturated = False
    rounds_run = 0
    for rnd in range(params.rounds + 1):
        cur = {}
        for m in range(1, top + 1):
            old = prev.get(m)
            sources = ([] if old is None else list(zip(old.formulas, old.tables))) + atoms[m] + quantified[m]
            cur[m] = _build_context(S, m, tol, cur.get(m - 1), sources)
            cur[m].extras = (old.extras if old else []) + quantified[m]
        stable = rnd > 0 and all(cur[m].dim == prev[m].dim for m in cur)
        full = all(cur[m].dim == S.size ** m for m in cur)
        prev = cur
        rounds_run = rnd
        # two rounds at least, so nested quantified formulas get recorded
        if (stable or full) and rnd >= min(2, params.rounds):
            saturated = True
            break
        if rnd == params.rounds:
            break
        quantified = {m: _quantify(S, cur[m + 1], samples, rng, fresh) if m < top else []
                      for m in range(1, top + 1)}
    sentences = _sentences(S, prev[1], samples, rng, fresh)
    return Fragment(S, n, params, prev, saturated, rounds_run, sentences)


def _sentences(S, ctx1, samples, rng, fresh):
    return [(f, t[0]) for f, t in _quantify(S, ctx1, samples, rng, fresh)]


def _listed(S, n, formulas, params, variables=None):
    names = context_variables(n)
    phis = list(formulas)
    fv = []
    for phi in phis:
        for v in free_variables(phi):
            if v not in fv:
                fv.append(v)
    mapping = _alias_map(fv, n, variables)
    phis = [rename_free(phi, mapping) for phi in phis]
    ev = Evaluator(S)
    basis = [Const(Fraction(1))] + phis
    tables = np.array([formula_table(phi, S, names, evaluator=ev) for phi in basis],
                      dtype=_dtype(S)).reshape(len(basis), S.size ** n)
    tol = 0 if S.mode == "exact" else FLOAT_RANK_TOL
    ctx = Context(n, names, basis, tables, 0, tol=tol)
    return Fragment(S, n, params, {n: ctx}, False, 0, [])


def _alias_map(names, m, variables=None):
    """Map user variable names onto x1..xm."""
    target = context_variables(m)
    if variables is not None:
        variables = list(variables)
        if len(variables) > m:
            raise FragmentError(f"{len(variables)} variables for a context of size {m}")
        extra = [v for v in names if v not in variables]
        if extra:
            raise FragmentError(f"unexpected variables: {', '.join(extra)}")
        return dict(zip(variables, target))
    if all(v in target for v in names):
        return {}
    order = sorted(names, key=lambda v: (ALIASES.index(v) if v in ALIASES else len(ALIASES), v))
    if len(order) > m:
        raise FragmentError(f"{len(order)} free variables for a context of size {m}")
    if any(v in target for v in order):
        raise FragmentError("mixing x1..xm names with other variable names")
    return dict(zip(order, target))


def check_basis_tables(fragment: Fragment):
    """Re-evaluate every basis formula; return the first mismatch or None."""
    S = fragment.structure
    ev = Evaluator(S)
    tol = S.tolerance
    for m, ctx in sorted(fragment.contexts.items()):
        for i, phi in enumerate(ctx.formulas):
            fresh = formula_table(phi, S, ctx.variables, evaluator=ev)
            for t, (a, b) in enumerate(zip(fresh, ctx.tables[i])):
                if not _is_zero(a - b, tol):
                    return {"context": m, "index": i, "tuple": t, "table": b, "eval": a}
    return None


# ------------------------------------------------------------ type vectors

@dataclass(eq=False)
class TypeVector:
    coords: tuple
    realizers: tuple
    arity: int
    params: tuple = ()

    def display(self):
        """Coordinates without the constant-1 entry."""
        return self.coords[1:]


@dataclass(eq=False)
class TypeSpace:
    fragment: Fragment
    n: int
    vectors: list

    @property
    def points(self):
        return [v.coords for v in self.vectors]

    @property
    def eps(self):
        return self.fragment.structure.tolerance

    def find(self, coords):
        for v in self.vectors:
            if same_point(v.coords, coords, self.eps):
                return v
        return None

    def vector_of(self, tup):
        tup = tuple(tup)
        for v in self.vectors:
            if tup in v.realizers:
                return v
        raise KeyError(tup)


def _group(columns, tuples, eps):
    """Deduplicate (coords, tuple) pairs, keeping first-seen order."""
    groups = []
    if eps == 0:
        index = {}
        for c, t in zip(columns, tuples):
            if c in index:
                groups[index[c]][1].append(t)
            else:
                index[c] = len(groups)
                groups.append((c, [t]))
        return groups
    for c, t in zip(columns, tuples):
        for g in groups:
            if same_point(g[0], c, eps):
                g[1].append(t)
                break
        else:
            groups.append((c, [t]))
    return groups


def realized_types(S: FiniteStructure, n, fragment: Fragment, points=None) -> TypeSpace:
    """All type vectors of n-tuples; ``points`` restricts the tuples to a subset."""
    ctx = fragment.context(n)
    dom = range(S.size) if points is None else sorted(points)
    tuples = list(itertools.product(dom, repeat=n))
    cols = [ctx.column(tuple_index(S, t)) for t in tuples]
    groups = _group(cols, tuples, S.tolerance)
    return TypeSpace(fragment, n, [TypeVector(c, tuple(ts), n) for c, ts in groups])


def extreme_types(TS: TypeSpace) -> list:
    idx = extreme_subset(TS.points, TS.eps)
    return [TS.vectors[i] for i in idx]


def is_extreme_vector(TS: TypeSpace, v: TypeVector):
    return any(w is v for w in extreme_types(TS))


# ------------------------------------------------------------ partial types

@dataclass(eq=False)
class PartialType:
    conditions: list
    constraints: list
    arity: int
    variables: dict  # user name -> context variable


def compile_partial_type(fragment: Fragment, m, conditions, variables=None) -> PartialType:
    """Compile conditions into linear constraints on m-type vectors.

    ``conditions`` is a list of Condition objects or condition text.
    """
    from .parser import parse_conditions
    S = fragment.structure
    if isinstance(conditions, str):
        conditions = parse_conditions(conditions, S.signature)
    ctx = fragment.context(m)
    names = []
    for c in conditions:
        for side in (c.left, c.right):
            for v in free_variables(side):
                if v not in names:
                    names.append(v)
    mapping = _alias_map(names, m, variables)
    ev = Evaluator(S)
    constraints = []
    for c in conditions:
        left = rename_free(c.left, mapping)
        right = rename_free(c.right, mapping)
        diff = (formula_table(left, S, ctx.variables, evaluator=ev)
                - formula_table(right, S, ctx.variables, evaluator=ev))
        coeffs = ctx.span_coefficients(diff)
        if coeffs is None:
            raise FragmentError(f"condition outside fragment span: {_show(c)}")
        zero = coeffs[0] * 0
        constraints.append(LinearConstraint(coeffs, "=" if c.relation == "=" else "<=", zero))
    return PartialType(list(conditions), constraints, m, mapping)


def _show(c):
    from .parser import print_condition
    return print_condition(c)


def is_face_partial_type(TS: TypeSpace, gamma):
    """Face verdict for the region cut out by gamma in the n-type space."""
    if not isinstance(gamma, PartialType):
        gamma = compile_partial_type(TS.fragment, TS.n, gamma)
    if gamma.arity != TS.n:
        raise FragmentError(f"partial type over {gamma.arity} variables, type space over {TS.n}")
    return is_face_region(TS.points, gamma.constraints, TS.eps)


# ------------------------------------------------------------ metric, faces

def type_metric(S: FiniteStructure, p: TypeVector, q: TypeVector):
    if not p.realizers or not q.realizers:
        raise FragmentError("type metric needs realized vectors")
    return min(tuple_metric(S, a, b) for a in p.realizers for b in q.realizers)


def sigma_conditions(fragment: Fragment, p: TypeVector, q: TypeVector, r):
    """p(x) together with q(y) and d(x, y) <= r, over the variables x1..x2n."""
    n = p.arity
    ctx = fragment.context(n)
    shift = {f"x{i}": f"x{n + i}" for i in range(1, n + 1)}
    conds = []
    for j in range(1, ctx.dim):
        f = ctx.formulas[j]
        conds.append(Condition(f, "=", Const(Fraction(p.coords[j]))))
        conds.append(Condition(rename_free(f, shift), "=", Const(Fraction(q.coords[j]))))
    dist = linear_combination([Fraction(1, 2 ** i) for i in range(n)],
                              [Dist(Var(f"x{i + 1}"), Var(f"x{n + i + 1}")) for i in range(n)])
    conds.append(Condition(dist, "<=", Const(Fraction(r))))
    return conds


def sigma_face(S: FiniteStructure, fragment: Fragment, p: TypeVector, q: TypeVector, TS2=None):
    """(PartialType, FaceVerdict, r) for p(x) + q(y) + d(x,y) <= r with r the type distance."""
    if p.arity != q.arity:
        raise FragmentError("p and q have different arities")
    n = p.arity
    if not fragment.generated:
        raise FragmentError("sigma_face needs a generated fragment")
    r = type_metric(S, p, q)
    gamma = compile_partial_type(fragment, 2 * n, sigma_conditions(fragment, p, q, r))
    TS2 = TS2 or realized_types(S, 2 * n, fragment)
    return gamma, is_face_partial_type(TS2, gamma), r


def sigma_marginals_ok(S, fragment, TS2, verdict, p, q):
    """Every vertex of the face has x-marginal p and y-marginal q."""
    n = p.arity
    ctx = fragment.context(n)
    eps = S.tolerance
    for i in verdict.vertices:
        for t in TS2.vectors[i].realizers:
            a, b = t[:n], t[n:]
            if not (same_point(ctx.column(tuple_index(S, a)), p.coords, eps)
                    and same_point(ctx.column(tuple_index(S, b)), q.coords, eps)):
                return False
    return True


# ---------------------------------------------------- restriction, over b

def restrict_coords(fragment: Fragment, coords, n):
    """Project an (n+1)-vector onto the n-basis sitting in its leading coordinates."""
    if not fragment.generated:
        raise FragmentError("restriction needs a generated fragment (listed bases do not embed)")
    upper = fragment.context(n + 1)
    lower = fragment.context(n)
    if upper.lifted < lower.dim:
        raise FragmentError("fragments not compatible")
    return tuple(coords[:lower.dim])


def restrict_type(fragment: Fragment, v: TypeVector) -> TypeVector:
    n = v.arity - 1
    if n < 1:
        raise FragmentError("cannot restrict a 1-type")
    coords = restrict_coords(fragment, v.coords, n)
    S = fragment.structure
    ctx = fragment.context(n)
    tuples = [t for t in itertools.product(range(S.size), repeat=n)
              if same_point(ctx.column(tuple_index(S, t)), coords, S.tolerance)]
    return TypeVector(coords, tuple(tuples), n)


def tp_over(S: FiniteStructure, fragment: Fragment, a, b=()) -> TypeVector:
    a, b = tuple(a), tuple(b)
    ctx = fragment.context(len(a) + len(b))
    coords = ctx.column(tuple_index(S, a + b))
    real = tuple(c for c in itertools.product(range(S.size), repeat=len(a))
                 if same_point(ctx.column(tuple_index(S, c + b)), coords, S.tolerance))
    return TypeVector(coords, real, len(a), b)


def over_space(S: FiniteStructure, fragment: Fragment, k, b=()) -> list:
    """Deduplicated type vectors of k-tuples over the parameters b."""
    b = tuple(b)
    ctx = fragment.context(k + len(b))
    tuples = list(itertools.product(range(S.size), repeat=k))
    cols = [ctx.column(tuple_index(S, c + b)) for c in tuples]
    return [TypeVector(c, tuple(ts), k, b) for c, ts in _group(cols, tuples, S.tolerance)]


def extreme_over(S, fragment, k, b=()):
    """The vectors of over_space(k, b) that are extreme."""
    space = over_space(S, fragment, k, b)
    return [space[i] for i in extreme_subset([v.coords for v in space], S.tolerance)]


def is_extreme_over(S: FiniteStructure, fragment: Fragment, a, b=()) -> bool:
    target = tp_over(S, fragment, a, b)
    return any(same_point(v.coords, target.coords, S.tolerance)
               for v in extreme_over(S, fragment, len(tuple(a)), b))


__all__ = [
    "ALIASES", "COEFF_POOL", "Context", "Fragment", "FragmentError", "FragmentParams",
    "PartialType", "TypeSpace", "TypeVector", "atomic_formulas", "check_basis_tables",
    "compile_partial_type", "context_variables", "extreme_over", "extreme_types",
    "formula_table", "generate_fragment", "is_extreme_over", "is_extreme_vector",
    "is_face_partial_type", "over_space", "realized_types", "restrict_coords",
    "restrict_type", "sigma_conditions", "sigma_face", "sigma_marginals_ok", "term_closure",
    "tp_over", "tuple_index", "type_metric",
]
