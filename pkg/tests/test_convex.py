import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from linlogic.convex import (
    dedupe, eq, extreme_subset, ge, in_hull, is_face_region, le, lp_solve, midpoint_screen,
    supporting_functional, verify_face_verdict,
)

F = Fraction
SQUARE = [(F(0), F(0)), (F(0), F(1)), (F(1), F(0)), (F(1), F(1))]


def solve_exact(A, b):
    """Unique solution of a square system by Gauss-Jordan, or None."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        M[col] = [v / M[col][col] for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                M[r] = [a - M[r][col] * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def hull_oracle(p, others):
    """p in conv(others) by Caratheodory: try affinely independent subsets."""
    k = len(p)
    for size in range(1, min(k + 1, len(others)) + 1):
        for sub in itertools.combinations(others, size):
            # least-squares-free check: solve on a square subsystem, then verify
            rows = [[u[i] for u in sub] for i in range(k)] + [[F(1)] * size]
            rhs = list(p) + [F(1)]
            for pick in itertools.combinations(range(k + 1), size):
                lam = solve_exact([rows[i] for i in pick], [rhs[i] for i in pick])
                if lam is None or any(l < 0 for l in lam):
                    continue
                if all(sum(r[j] * lam[j] for j in range(size)) == rhs[i] for i, r in enumerate(rows)):
                    return True
    return False


def test_lp_examples():
    res = lp_solve([ge([1], 0), le([1], 1)], 1, objective=[1], sense="max")
    assert res.status == "optimal" and res.value == 1 and res.x == (1,)
    assert lp_solve([le([1], -1), ge([1], 0)], 1).status == "infeasible"
    cons = [eq([1, 1, 1], 1), eq([0, 1, 1], 1), eq([1, 0, 1], 1), eq([1, 1, 0], 1)]
    assert lp_solve(cons, 3, nonneg=True).status == "infeasible"


def test_lp_unbounded_and_min():
    assert lp_solve([ge([1], 0)], 1, objective=[1]).status == "unbounded"
    res = lp_solve([ge([1, 1], 2), ge([1, 0], 0), ge([0, 1], 0)], 2, objective=[1, 2], sense="min")
    assert res.value == 2 and res.x == (2, 0)


def test_lp_float_mode():
    res = lp_solve([le([1.0], 0.5)], 1, objective=[1.0], eps=1e-9)
    assert abs(res.value - 0.5) < 1e-12


def test_lp_dimension_errors():
    with pytest.raises(ValueError):
        lp_solve([le([1, 1], 1)], 1)


def test_in_hull_examples():
    ok, lam = in_hull((F(1, 2),), [(F(0),), (F(1),)])
    assert ok and lam == (F(1, 2), F(1, 2))
    assert not in_hull((1, 1, 1), [(0, 1, 1), (1, 0, 1), (1, 1, 0)])[0]
    assert in_hull(SQUARE[2], SQUARE)[0]


def test_extreme_subset_examples():
    assert extreme_subset([(F(0),), (F(1, 2),), (F(1),)]) == [0, 2]
    assert extreme_subset(SQUARE + [(F(1, 2), F(1, 2))]) == [0, 1, 2, 3]
    assert extreme_subset([(F(3), F(4))]) == [0]
    # duplicates keep their first index only
    assert extreme_subset([(F(0),), (F(0),), (F(1),)]) == [0, 2]


def test_supporting_functional_examples():
    c, m = supporting_functional(SQUARE, [0, 1])
    for i, v in enumerate(SQUARE):
        val = sum(a * b for a, b in zip(c, v))
        assert val == m if i in (0, 1) else val <= m - 1
    assert supporting_functional(SQUARE, [0, 3]) is None
    c, m = supporting_functional(SQUARE, [0, 1, 2, 3])
    assert all(x == 0 for x in c) and m == 0


def test_face_region_examples():
    v = is_face_region(SQUARE, [le([1, 0], 0)])
    assert v.is_face and v.vertices == [0, 1]
    assert verify_face_verdict(v, SQUARE, [le([1, 0], 0)])

    seg = [(F(0),), (F(1),)]
    C = [le([1], F(2, 5))]
    v = is_face_region(seg, C)
    assert v.status == "not-face" and v.point == (F(2, 5),) and v.excluded == 1
    assert verify_face_verdict(v, seg, C)
    # the pairwise midpoint screen alone misses this one
    assert midpoint_screen(seg, C, v.vertices)

    three = [(F(0),), (F(1, 2),), (F(1),)]
    C = [le([1], F(1, 2))]
    v = is_face_region(three, C)
    assert v.status == "not-face"
    assert not midpoint_screen(three, C, v.vertices)


def test_empty_region():
    v = is_face_region(SQUARE, [ge([1, 1], 3)])
    assert v.status == "empty" and v.certificate() == {"kind": "empty"}


def test_dedupe_partition():
    uniq, where = dedupe([(1,), (2,), (1,), (3,), (2,)])
    assert uniq == [(1,), (2,), (3,)] and where == [0, 1, 0, 2, 1]


def _points(seed, size=None, k=None):
    rng = random.Random(seed)
    k = k or rng.randint(1, 3)
    size = size or rng.randint(1, 8)
    return [tuple(F(rng.randint(0, 4), rng.choice((1, 2))) for _ in range(k)) for _ in range(size)]


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_extreme_subset_matches_oracle(seed):
    V = _points(seed)
    uniq, where = dedupe(V)
    want = sorted(where.index(u) for u, p in enumerate(uniq)
                  if not hull_oracle(p, uniq[:u] + uniq[u + 1:]))
    assert extreme_subset(V) == want


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_in_hull_witness(seed):
    V = _points(seed)
    rng = random.Random(seed + 1)
    v = tuple(F(rng.randint(0, 8), 2) for _ in V[0])
    ok, lam = in_hull(v, V)
    assert ok == hull_oracle(v, dedupe(V)[0])
    if ok:
        assert sum(lam) == 1 and all(l >= 0 for l in lam)
        assert tuple(sum(l * u[i] for l, u in zip(lam, V)) for i in range(len(v))) == v


def _constraints(rng, k):
    out = []
    for _ in range(rng.randint(1, 2)):
        coeffs = [F(rng.randint(-2, 2)) for _ in range(k)]
        bound = F(rng.randint(-2, 6), 2)
        out.append((le, ge, eq)[rng.randrange(3)](coeffs, bound))
    return out


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_face_verdicts_verify(seed):
    rng = random.Random(seed)
    V = _points(seed)
    C = _constraints(rng, len(V[0]))
    v = is_face_region(V, C)
    assert verify_face_verdict(v, V, C)
    if v.is_face:
        assert midpoint_screen(V, C, v.vertices)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_face_verdict_stability(seed):
    rng = random.Random(seed)
    V = _points(seed)
    C = _constraints(rng, len(V[0]))
    base = is_face_region(V, C).status
    assert is_face_region(V + V[:2], C).status == base
    assert is_face_region(V, [c.scaled(F(3)) for c in C]).status == base
    perm = list(range(len(V[0])))
    rng.shuffle(perm)
    Vp = [tuple(u[i] for i in perm) for u in V]
    Cp = [type(c)(tuple(c.coeffs[i] for i in perm), c.relation, c.bound) for c in C]
    assert is_face_region(Vp, Cp).status == base
