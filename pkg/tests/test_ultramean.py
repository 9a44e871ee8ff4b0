import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from linlogic import Charge, build_ultramean, check_los, eval_formula, load_corpus, parse_formula, validate_structure
from linlogic.randgen import random_formula, random_signature, random_structure
from linlogic.syntax import free_variables
from linlogic.ultramean import integrate

M2 = load_corpus("M2").structure
half = Fraction(1, 2)


def test_charge_invariants():
    with pytest.raises(ValueError):
        Charge.of(half, Fraction(1, 3))
    with pytest.raises(ValueError):
        Charge.of(2, -1)
    with pytest.raises(ValueError):
        Charge(())
    assert Charge.point_mass(3, 1).weights == (0, 1, 0)


def test_integrate_examples():
    assert integrate(Charge.of(half, half), [0, 1]) == half
    assert integrate(Charge.point_mass(3, 2), [5, 6, 7]) == 7
    assert integrate(Charge.of(Fraction(1, 3), Fraction(2, 3)), [1, 1]) == 1
    with pytest.raises(ValueError):
        integrate(Charge.of(1), [1, 2])


def test_u2_construction():
    res = build_ultramean([M2, M2], Charge.of(half, half))
    U = res.structure
    assert U.labels == ("[a0a0]", "[a0a1]", "[a1a0]", "[a1a1]")
    assert U.d(U.point("[a0a0]"), U.point("[a0a1]")) == half
    assert U.relations["P"][(U.point("[a0a1]"),)] == half
    assert validate_structure(U) == []


def test_point_mass_collapses():
    res = build_ultramean([M2, M2], Charge.of(1, 0))
    U = res.structure
    assert U.size == 2
    assert res.representatives == ((0, 0), (1, 0))
    assert res.class_of((0, 1)) == res.class_of((0, 0))
    assert [U.relations["P"][(i,)] for i in range(2)] == [0, 1]


def test_single_factor_identity():
    U = build_ultramean([M2], Charge.of(1)).structure
    assert U.metric == M2.metric and U.relations == M2.relations and U.constants == M2.constants


def test_los_examples():
    mu = Charge.of(half, half)
    assert check_los(parse_formula("P(x)", M2.signature), [M2, M2], mu, {"x": (0, 1)}) == (half, half, True)
    phi = parse_formula("sup x . (P(x) - 2*d(x, y))", M2.signature)
    lhs, rhs, ok = check_los(phi, [M2, M2], mu, {"y": (0, 1)})
    assert ok and lhs == rhs


def test_los_requires_assignment():
    with pytest.raises(ValueError):
        check_los(parse_formula("P(x)", M2.signature), [M2], Charge.of(1), {})


def test_mismatched_factors():
    DC3 = load_corpus("DC3").structure
    with pytest.raises(ValueError):
        build_ultramean([M2, DC3], Charge.of(half, half))
    with pytest.raises(ValueError):
        build_ultramean([M2], Charge.of(half, half))


def test_u2_averaging_law():
    U = load_corpus("U2").structure
    for text in ("P(x)", "d(x, c0)", "sup y . (d(x, y) + P(y))", "inf y . (1/2 * d(x, y) + P(x))"):
        phi = parse_formula(text, U.signature)
        val = {lab: eval_formula(phi, U, {"x": U.point(lab)}) for lab in U.labels}
        assert val["[a0a1]"] == half * val["[a0a0]"] + half * val["[a1a1]"]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_diagonal_embedding_is_elementary(seed):
    rng = random.Random(seed)
    N = random_structure(rng, max_points=3)
    m = rng.randint(1, 3)
    raw = [rng.randint(1, 3) for _ in range(m)]
    mu = Charge.of(*(Fraction(w, sum(raw)) for w in raw))
    res = build_ultramean([N] * m, mu, check=False)
    phi = random_formula(rng, N.signature, depth=3, qdepth=2)
    asg = {v: rng.randrange(N.size) for v in free_variables(phi)}
    diag = {v: res.class_of((a,) * m) for v, a in asg.items()}
    assert eval_formula(phi, N, asg) == eval_formula(phi, res.structure, diag)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_ultramean_validates_and_classes_are_maximal(seed):
    rng = random.Random(seed)
    sig = random_signature(rng)
    factors = [random_structure(rng, max_points=3, signature=sig) for _ in range(rng.randint(1, 3))]
    raw = [rng.randint(0, 2) for _ in factors]
    raw[0] += 1
    res = build_ultramean(factors, Charge.of(*(Fraction(w, sum(raw)) for w in raw)))
    U = res.structure
    assert validate_structure(U) == []
    # distinct classes are at positive distance; same-class tuples are at distance zero
    assert all(U.d(i, j) > 0 for i in range(U.size) for j in range(U.size) if i != j)
    for t, c in res.classes.items():
        assert res.representatives[c] <= t
