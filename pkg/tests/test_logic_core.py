import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from linlogic import Signature, eval_formula, load_corpus, make_structure, parse_formula, print_formula
from linlogic.parser import ParseError, parse_condition, parse_conditions
from linlogic.randgen import random_formula, random_signature, random_structure
from linlogic.syntax import (
    Add, Apply, Const, ConstSym, Dist, Inf, Rel, Scale, SignatureError, Sup, Var, free_variables,
    syntactic_bounds,
)

SIG = Signature.build(["c0"], functions={"F": (1, 1)}, relations={"P": (1, 1), "R": (2, 2)})
x, y = Var("x"), Var("y")


def test_parse_examples():
    phi = parse_formula("sup x . (2 * P(x) + d(x, c0))", SIG)
    assert phi == Sup("x", Add(Scale(Fraction(2), Rel("P", (x,))), Dist(x, ConstSym("c0"))))
    assert parse_formula("1/2", SIG) == Const(Fraction(1, 2))


def test_subtraction_and_negation_desugar():
    assert parse_formula("P(x) - d(x, y)", SIG) == Add(Rel("P", (x,)), Scale(Fraction(-1), Dist(x, y)))
    assert parse_formula("-1 * 2", SIG) == Scale(Fraction(-1), Const(Fraction(2)))
    assert parse_formula("0.25 * P(x)", SIG) == Scale(Fraction(1, 4), Rel("P", (x,)))


def test_nested_terms():
    assert parse_formula("R(F(x), c0)", SIG) == Rel("R", (Apply("F", (x,)), ConstSym("c0")))


@pytest.mark.parametrize("text,kind", [
    ("Q(x)", "unknown-symbol"),
    ("P(x, y)", "arity"),
    ("F(x)", "unknown-symbol"),
    ("sup x . sup x . P(x)", "rebound"),
    ("P(x) $ 1", "lexical"),
    ("P(x", "syntax"),
    ("d(x)", "syntax"),
])
def test_parse_errors(text, kind):
    with pytest.raises(ParseError) as err:
        parse_formula(text, SIG)
    assert err.value.kind == kind
    assert err.value.position >= 0


def test_error_position_points_at_symbol():
    with pytest.raises(ParseError) as err:
        parse_formula("P(x) + Q(y)", SIG)
    assert err.value.position == 7


def test_declared_variables_restrict_names():
    with pytest.raises(ParseError):
        parse_formula("d(x, z)", SIG, variables=("x", "y"))


def test_print_examples():
    assert print_formula(Sup("x", Rel("P", (x,)))) == "sup x . P(x)"
    assert print_formula(Scale(Fraction(-1), Const(Fraction(2)))) == "-1 * 2"
    phi = Add(Const(Fraction(1, 3)), Dist(x, y))
    assert parse_formula(print_formula(phi), SIG) == phi


def test_right_nested_sum_keeps_shape():
    phi = Add(Rel("P", (x,)), Add(Dist(x, y), Const(Fraction(1))))
    assert parse_formula(print_formula(phi), SIG) == phi


def test_free_variables():
    assert free_variables(Sup("x", Add(Rel("P", (x,)), Dist(x, y)))) == ["y"]
    assert free_variables(Const(Fraction(3))) == []
    assert free_variables(Dist(x, y)) == ["x", "y"]
    assert free_variables(parse_formula("d(y, x) + inf z . d(z, y)", SIG)) == ["y", "x"]


def test_bounds_examples():
    b, lam = syntactic_bounds(Dist(x, y), SIG)
    assert (b, lam) == (1, {"x": 1, "y": 1})
    b, lam = syntactic_bounds(Scale(Fraction(2), Rel("P", (x,))), SIG)
    assert (b, lam) == (2, {"x": 2})
    b, lam = syntactic_bounds(Add(Const(Fraction(1)), Dist(x, y)), SIG)
    assert (b, lam["x"]) == (2, 1)
    b, lam = syntactic_bounds(parse_formula("sup x . R(x, F(y))", SIG), SIG)
    assert (b, lam) == (1, {"y": 1})


def test_bounds_checked_on_all_two_point_structures():
    # every exact two-point M2-type structure with distance and P on a small grid
    phi = Add(Const(Fraction(1)), Dist(x, y))
    b, lam = syntactic_bounds(phi, SIG)
    sig = Signature.build(relations={"P": (1, 1)})
    grid = [Fraction(k, 4) for k in range(5)]
    for dist in grid[1:]:
        S = make_structure(sig, ["a", "b"], [[0, dist], [dist, 0]], relations={"P": {(0,): 0, (1,): 0}})
        vals = {(u, v): eval_formula(phi, S, {"x": u, "y": v}) for u in range(2) for v in range(2)}
        assert max(abs(v) for v in vals.values()) <= b
        for v in range(2):
            assert abs(vals[(0, v)] - vals[(1, v)]) <= lam["x"] * dist


def test_signature_invariants():
    with pytest.raises(SignatureError):
        Signature.build(["P"], relations={"P": (1, 1)})
    with pytest.raises(SignatureError):
        Signature.build(relations={"d": (2, 1)})
    with pytest.raises(SignatureError):
        Signature.build(relations={"P": (1, -1)})


def test_conditions():
    c = parse_condition("P(x) >= 1/2", SIG)
    assert c.relation == "<=" and c.left == Const(Fraction(1, 2))
    eq = parse_condition("d(x, c0) = 1", SIG)
    assert len(eq.inequalities()) == 2
    assert len(parse_conditions("P(x) <= 1; d(x,y) = 0;", SIG)) == 2
    with pytest.raises(ParseError):
        parse_condition("P(x) <= 1 <= 2", SIG)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_property(seed):
    rng = random.Random(seed)
    sig = random_signature(rng, max_constants=2, functions=rng.randint(0, 1))
    phi = random_formula(rng, sig, depth=4, term_depth=2)
    assert parse_formula(print_formula(phi), sig) == phi
    # printing is a fixed point after one round
    assert print_formula(parse_formula(print_formula(phi), sig)) == print_formula(phi)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_bound_and_lipschitz_soundness(seed):
    rng = random.Random(seed)
    S = random_structure(rng, max_points=3)
    phi = random_formula(rng, S.signature, depth=3, qdepth=1)
    b, lam = syntactic_bounds(phi, S.signature)
    fv = free_variables(phi)
    for asg in itertools.product(range(S.size), repeat=len(fv)):
        a = dict(zip(fv, asg))
        val = eval_formula(phi, S, a)
        assert abs(val) <= b
        for v in fv:
            for u in range(S.size):
                moved = eval_formula(phi, S, {**a, v: u})
                assert abs(moved - val) <= lam.get(v, 0) * S.d(a[v], u)


@pytest.mark.parametrize("name", ["M2", "DC3", "singleton"])
def test_corpus_formula_bounds(name):
    entry = load_corpus(name)
    S = entry.structure
    for text in entry.formulas:
        phi = parse_formula(text, S.signature)
        b, _ = syntactic_bounds(phi, S.signature)
        fv = free_variables(phi)
        for asg in itertools.product(range(S.size), repeat=len(fv)):
            assert abs(eval_formula(phi, S, dict(zip(fv, asg)))) <= b
