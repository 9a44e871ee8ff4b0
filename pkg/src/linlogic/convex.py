"""Exact convex geometry on finite point sets.

Everything reduces to a dense two-phase simplex with Bland's rule, run on
exact rationals (``eps=0``) or on floats with an absolute tolerance.  The
exact pivots use gmpy2 rationals internally; results come back as Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple
    relation: str
    bound: object

    def __post_init__(self):
        if self.relation not in (LE, EQ, GE):
            raise ValueError(f"bad relation {self.relation!r}")

    def value(self, x):
        return sum((a * b for a, b in zip(self.coeffs, x)), 0)

    def holds(self, x, eps=0):
        lhs = self.value(x)
        if self.relation == LE:
            return lhs <= self.bound + eps
        if self.relation == GE:
            return lhs >= self.bound - eps
        return abs(lhs - self.bound) <= eps

    def scaled(self, factor):
        """Same constraint multiplied by a positive factor."""
        return LinearConstraint(tuple(a * factor for a in self.coeffs), self.relation,
                                self.bound * factor)


def le(coeffs, bound):
    return LinearConstraint(tuple(coeffs), LE, bound)


def ge(coeffs, bound):
    return LinearConstraint(tuple(coeffs), GE, bound)


def eq(coeffs, bound):
    return LinearConstraint(tuple(coeffs), EQ, bound)


@dataclass(frozen=True)
class LPResult:
    status: str            # optimal | infeasible | unbounded
    value: object = None
    x: tuple = None

    @property
    def feasible(self):
        return self.status != "infeasible"


class _Tableau:
    def __init__(self, rows, rhs, basis, eps):
        self.T = [list(r) + [b] for r, b in zip(rows, rhs)]
        self.basis = list(basis)
        self.eps = eps

    @property
    def ncols(self):
        return len(self.T[0]) - 1 if self.T else 0

    def pivot(self, r, c):
        T = self.T
        row = T[r]
        p = row[c]
        row[:] = [v / p for v in row]
        for i, other in enumerate(T):
            if i != r:
                f = other[c]
                if f:
                    other[:] = [a - f * b for a, b in zip(other, row)]
        self.basis[r] = c

    def minimize(self, cost, allowed):
        """Minimize cost . x from the current basic feasible solution."""
        eps = self.eps
        T = self.T
        while True:
            enter = None
            for j in allowed:
                if j in self.basis:
                    continue
                red = cost[j] - sum(cost[b] * T[i][j] for i, b in enumerate(self.basis) if cost[b])
                if red < -eps:
                    enter = j
                    break
            if enter is None:
                return "optimal"
            best = None
            for i, row in enumerate(T):
                a = row[enter]
                if a > eps:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)

    def solution(self, n):
        x = [0] * n
        for i, b in enumerate(self.basis):
            if b < n:
                x[b] = self.T[i][-1]
        return x


def lp_solve(constraints, k, objective=None, sense="max", nonneg=False, eps=0):
    """Optimize ``objective . x`` over the constraints (feasibility if None).

    Unknowns are free unless ``nonneg``.  Exact when inputs are Fractions
    and ``eps == 0``.
    """
    if k < 1:
        raise ValueError("need at least one unknown")
    for c in constraints:
        if len(c.coeffs) != k:
            raise ValueError(f"constraint has {len(c.coeffs)} coefficients, expected {k}")
    if objective is not None and len(objective) != k:
        raise ValueError(f"objective has {len(objective)} coefficients, expected {k}")
    zero = mpq(0) if eps == 0 else 0.0
    one = zero + 1

    nv = k if nonneg else 2 * k
    rows, rhs, kinds = [], [], []
    for c in constraints:
        coeffs = list(c.coeffs) if nonneg else list(c.coeffs) + [-a for a in c.coeffs]
        coeffs = [zero + a for a in coeffs]
        b = zero + c.bound
        rel = c.relation
        if b < 0:
            coeffs = [-a for a in coeffs]
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        rows.append(coeffs)
        rhs.append(b)
        kinds.append(rel)
    m = len(rows)

    n_slack = sum(1 for r in kinds if r != EQ)
    n_art = sum(1 for r in kinds if r != LE)
    width = nv + n_slack + n_art
    full = []
    basis = []
    s_col = nv
    a_col = nv + n_slack
    art_cols = []
    for coeffs, rel in zip(rows, kinds):
        row = coeffs + [zero] * (n_slack + n_art)
        if rel == LE:
            row[s_col] = one
            basis.append(s_col)
            s_col += 1
        else:
            if rel == GE:
                row[s_col] = -one
                s_col += 1
            row[a_col] = one
            basis.append(a_col)
            art_cols.append(a_col)
            a_col += 1
        full.append(row)

    tab = _Tableau(full, rhs, basis, eps)
    if art_cols:
        cost1 = [zero] * width
        for j in art_cols:
            cost1[j] = one
        tab.minimize(cost1, range(width))
        infeas = sum((tab.T[i][-1] for i, b in enumerate(tab.basis) if b in art_cols), zero)
        if infeas > eps:
            return LPResult("infeasible")
        art = set(art_cols)
        keep = []
        for i in range(len(tab.T)):
            if tab.basis[i] in art:
                col = next((j for j in range(width) if j not in art and abs(tab.T[i][j]) > eps), None)
                if col is None:
                    continue
                tab.pivot(i, col)
            keep.append(i)
        tab.T = [tab.T[i] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]
        allowed = [j for j in range(width) if j not in art]
    else:
        allowed = list(range(width))

    if objective is None:
        x = [_out(zero + v) for v in tab.solution(nv)]
        return LPResult("optimal", _out(zero), _fold(x, k, nonneg))
    obj = [zero + a for a in objective]
    if not nonneg:
        obj = obj + [-a for a in obj]
    sign = -1 if sense == "max" else 1
    cost = [sign * a for a in obj] + [zero] * (width - nv)
    status = tab.minimize(cost, allowed)
    if status == "unbounded":
        return LPResult("unbounded")
    x = _fold([_out(zero + v) for v in tab.solution(nv)], k, nonneg)
    value = sum((a * b for a, b in zip(objective, x)), _out(zero))
    return LPResult("optimal", value, x)


def _out(v):
    if isinstance(v, float):
        return v
    return Fraction(int(v.numerator), int(v.denominator))


def _fold(x, k, nonneg):
    if nonneg:
        return tuple(x[:k])
    return tuple(x[j] - x[k + j] for j in range(k))


# ------------------------------------------------------------- point sets

def _zero(eps):
    return Fraction(0) if eps == 0 else 0.0


def same_point(u, v, eps=0):
    return all(abs(a - b) <= eps for a, b in zip(u, v))


def dedupe(V, eps=0):
    """(unique points, index map original -> unique index)."""
    uniq, where = [], []
    for v in V:
        for i, u in enumerate(uniq):
            if same_point(u, v, eps):
                where.append(i)
                break
        else:
            where.append(len(uniq))
            uniq.append(tuple(v))
    return uniq, where


def _check_dims(V, k=None):
    dims = {len(v) for v in V}
    if k is not None:
        dims.add(k)
    if len(dims) > 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


def _hull_rows(V, C):
    """Constraint C on sum lambda_j V_j, written in the lambda unknowns."""
    return [LinearConstraint(tuple(c.value(v) for v in V), c.relation, c.bound) for c in C]


def in_hull(v, V, eps=0):
    """Decide v in conv(V); returns (bool, coefficients or None)."""
    if not V:
        raise ValueError("empty point set")
    _check_dims(list(V) + [v])
    k = len(v)
    one = _zero(eps) + 1
    cons = [eq([one] * len(V), one)]
    for i in range(k):
        cons.append(eq([u[i] for u in V], v[i]))
    res = lp_solve(cons, len(V), nonneg=True, eps=eps)
    if not res.feasible:
        return False, None
    return True, res.x


def extreme_subset(V, eps=0):
    """Indices (first occurrences) of the extreme points of conv(V)."""
    if not V:
        return []
    _check_dims(V)
    uniq, where = dedupe(V, eps)
    first = {}
    for i, u in enumerate(where):
        first.setdefault(u, i)
    out = []
    for u, p in enumerate(uniq):
        others = uniq[:u] + uniq[u + 1:]
        if not others or not in_hull(p, others, eps)[0]:
            out.append(first[u])
    return sorted(out)


def supporting_functional(V, E, eps=0):
    """A functional (c, m) with c.e = m on E and c.u <= m - 1 elsewhere.

    ``E`` is a list of indices into V.  Points of V inside conv(E) count as
    part of E.  Returns None iff conv(E) is not a face of conv(V).  The
    improper face E = V gets the zero functional.
    """
    if not E:
        raise ValueError("E must be nonempty")
    if any(not 0 <= i < len(V) for i in E):
        raise ValueError("E is not a subset of V")
    _check_dims(V)
    k = len(V[0])
    zero = _zero(eps)
    Epts = [V[i] for i in E]
    inside = [i for i in range(len(V)) if i in E or in_hull(V[i], Epts, eps)[0]]
    rest = [i for i in range(len(V)) if i not in inside]
    if not rest:
        return tuple([zero] * k), zero
    # unknowns: c_0..c_{k-1}, m
    cons = []
    for i in inside:
        cons.append(eq(tuple(V[i]) + (zero - 1,), zero))
    for i in rest:
        cons.append(le(tuple(V[i]) + (zero - 1,), zero - 1))
    res = lp_solve(cons, k + 1, eps=eps)
    if not res.feasible:
        return None
    return res.x[:k], res.x[k]


@dataclass
class FaceVerdict:
    """``status`` is empty, face or not-face.

    A face carries ``functional``/``level`` exposing it and the indices of
    V it contains.  A not-face carries a point of the region written as a
    convex combination of V with positive weight on ``excluded``, a point
    of V outside the region.
    """

    status: str
    vertices: list = field(default_factory=list)
    functional: tuple = None
    level: object = None
    point: tuple = None
    coefficients: tuple = None
    excluded: int = None

    @property
    def is_face(self):
        return self.status == "face"

    def certificate(self):
        if self.status == "face":
            return {"kind": "supporting-functional", "functional": list(self.functional),
                    "level": self.level, "vertices": list(self.vertices)}
        if self.status == "not-face":
            return {"kind": "excluded-endpoint", "point": list(self.point),
                    "coefficients": list(self.coefficients), "excluded": self.excluded}
        return {"kind": "empty"}


def _combine(V, lam):
    k = len(V[0])
    return tuple(sum((l * v[i] for l, v in zip(lam, V)), 0) for i in range(k))


def is_face_region(V, C, eps=0):
    """Decide whether conv(V) intersected with the constraints C is a face."""
    if not V:
        raise ValueError("empty point set")
    _check_dims(V)
    k = len(V[0])
    for c in C:
        if len(c.coeffs) != k:
            raise ValueError(f"constraint has {len(c.coeffs)} coefficients, expected {k}")
    zero = _zero(eps)
    one = zero + 1
    n = len(V)
    base = [eq([one] * n, one)] + _hull_rows(V, C)
    feas = lp_solve(base, n, nonneg=True, eps=eps)
    if not feas.feasible:
        return FaceVerdict("empty")
    E = [i for i, v in enumerate(V) if all(c.holds(v, eps) for c in C)]
    if E:
        sf = supporting_functional(V, E, eps)
        if sf is not None:
            c, m = sf
            weights = [sum((a * b for a, b in zip(c, v)), zero) for v in V]
            low = lp_solve(base, n, objective=weights, sense="min", nonneg=True, eps=eps)
            if low.value >= m - eps:
                return FaceVerdict("face", vertices=E, functional=tuple(c), level=m)
    return _not_face_certificate(V, C, E, base, eps)


def _not_face_certificate(V, C, E, base, eps):
    n = len(V)
    zero = _zero(eps)
    outside = [zero if i in E else zero + 1 for i in range(n)]
    res = lp_solve(base, n, objective=outside, sense="max", nonneg=True, eps=eps)
    if res.value <= eps:
        raise ArithmeticError("face tests disagree; tolerance too loose or too tight")
    lam = res.x
    excluded = max((i for i in range(n) if i not in E), key=lambda i: (lam[i], -i))
    return FaceVerdict("not-face", vertices=E, point=_combine(V, lam), coefficients=tuple(lam),
                       excluded=excluded)


def verify_face_verdict(verdict: FaceVerdict, V, C, eps=0) -> bool:
    """Re-check a certificate by direct arithmetic."""
    if verdict.status == "face":
        c, m = verdict.functional, verdict.level
        E = set(verdict.vertices)
        for i, v in enumerate(V):
            val = sum((a * b for a, b in zip(c, v)), 0)
            if i in E:
                if abs(val - m) > eps or not all(x.holds(v, eps) for x in C):
                    return False
            elif val > m - 1 + eps:
                return False
        return True
    if verdict.status == "not-face":
        lam = verdict.coefficients
        if any(l < -eps for l in lam) or abs(sum(lam) - 1) > eps:
            return False
        if not same_point(_combine(V, lam), verdict.point, eps):
            return False
        if not all(x.holds(verdict.point, eps) for x in C):
            return False
        u = verdict.excluded
        return lam[u] > eps and not all(x.holds(V[u], eps) for x in C)
    return True


def midpoint_screen(V, C, E, eps=0) -> bool:
    """Necessary condition for a face: no region midpoint of V-pairs leaves E."""
    Eset = set(E)
    for i in range(len(V)):
        for j in range(i, len(V)):
            mid = tuple((a + b) / 2 for a, b in zip(V[i], V[j]))
            if all(c.holds(mid, eps) for c in C) and not (i in Eset and j in Eset):
                return False
    return True
