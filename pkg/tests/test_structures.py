import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from linlogic import eval_formula, load_corpus, make_structure, parse_formula, tuple_metric, validate_structure
from linlogic.randgen import random_formula, random_structure
from linlogic.structures import EvaluationError, Evaluator, InvalidStructure, eval_term, require_valid
from linlogic.syntax import Add, Apply, Const, ConstSym, Dist, Inf, Rel, Scale, Sup, Var, free_variables


def oracle(phi, S, asg):
    """Independent evaluator: quantifiers expanded into explicit lists."""
    def term(t):
        if isinstance(t, Var):
            return asg[t.name]
        if isinstance(t, ConstSym):
            return S.constants[t.name]
        return S.functions[t.func][tuple(term(a) for a in t.args)]

    if isinstance(phi, Const):
        return S.num(phi.value)
    if isinstance(phi, Dist):
        return S.metric[term(phi.left)][term(phi.right)]
    if isinstance(phi, Rel):
        return S.relations[phi.name][tuple(term(a) for a in phi.args)]
    if isinstance(phi, Scale):
        return S.num(phi.factor) * oracle(phi.body, S, asg)
    if isinstance(phi, Add):
        return oracle(phi.left, S, asg) + oracle(phi.right, S, asg)
    values = [oracle(phi.body, S, {**asg, phi.var: a}) for a in range(S.size)]
    return max(values) if isinstance(phi, Sup) else min(values)


M2 = load_corpus("M2").structure


def _m2_like(dist, p1=1):
    return make_structure(M2.signature, ["a0", "a1"], [[0, dist], [dist, 0]], {"c0": 0},
                          relations={"P": {(0,): 0, (1,): p1}})


def test_corpus_validates():
    for name in ("M2", "U2", "DC3", "DC3-open", "C8", "singleton"):
        assert validate_structure(load_corpus(name).structure) == []


def test_lipschitz_violation_example():
    report = validate_structure(_m2_like(Fraction(1, 2)))
    assert [v.axiom for v in report] == ["relation-lipschitz"]
    v = report[0]
    assert v.witness == ("P", ("a0",), ("a1",))
    assert v.values == (1, Fraction(1, 2))


def test_zero_distance_violation():
    report = validate_structure(_m2_like(0, p1=0))
    assert {v.axiom for v in report} == {"metric-positivity"}
    assert report[0].witness == ("a0", "a1")


def test_missing_interpretation():
    S = make_structure(M2.signature, ["a0", "a1"], [[0, 1], [1, 0]], {}, relations={"P": {(0,): 0}})
    axioms = [v.axiom for v in validate_structure(S)]
    assert axioms.count("interpretation") == 2
    with pytest.raises(InvalidStructure):
        require_valid(S)


def test_function_lipschitz():
    from linlogic import Signature
    sig = Signature.build(functions={"F": (1, Fraction(1, 2))})
    S = make_structure(sig, ["a", "b"], [[0, 1], [1, 0]], functions={"F": {(0,): 1, (1,): 0}})
    report = validate_structure(S)
    assert [v.axiom for v in report] == ["function-lipschitz"]


def test_eval_examples():
    P = parse_formula("P(x)", M2.signature)
    assert eval_formula(P, M2, {"x": 1}) == 1
    assert eval_formula(parse_formula("sup x . P(x)", M2.signature), M2) == 1
    assert eval_formula(parse_formula("2*P(x) + d(x,c0)", M2.signature), M2, {"x": 1}) == 3
    assert eval_term(Var("x"), M2, {"x": 1}) == 1
    assert eval_term(ConstSym("c0"), M2, {}) == 0


def test_eval_function_identity():
    from linlogic import Signature
    sig = Signature.build(functions={"F": (1, 1)})
    S = make_structure(sig, ["a", "b"], [[0, 1], [1, 0]], functions={"F": {(0,): 0, (1,): 1}})
    assert eval_term(Apply("F", (Var("x"),)), S, {"x": 1}) == 1


def test_missing_assignment():
    with pytest.raises(EvaluationError):
        eval_formula(parse_formula("P(x)", M2.signature), M2, {})


def test_tuple_metric_examples():
    assert tuple_metric(M2, (0, 1), (1, 1)) == 1
    assert tuple_metric(M2, (0, 1), (1, 0)) == Fraction(3, 2)
    assert tuple_metric(M2, (0, 1), (0, 1)) == 0
    with pytest.raises(ValueError):
        tuple_metric(M2, (0,), (0, 1))


def test_domain_restriction():
    sup_p = parse_formula("sup x . P(x)", M2.signature)
    assert eval_formula(sup_p, M2, domain=[0]) == 0
    assert Evaluator(M2, domain=[1])(sup_p, {}) == 1


def test_float_mode_tolerance():
    import math
    C8 = load_corpus("C8").structure
    assert abs(C8.d(0, 4) - 1) <= C8.eps
    assert abs(C8.d(0, 1) - math.sin(math.pi / 8)) <= C8.eps


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_eval_matches_oracle(seed):
    rng = random.Random(seed)
    S = random_structure(rng, max_points=4)
    phi = random_formula(rng, S.signature, depth=4, qdepth=2)
    asg = {v: rng.randrange(S.size) for v in free_variables(phi)}
    assert eval_formula(phi, S, asg) == oracle(phi, S, asg)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_random_structures_are_valid(seed):
    S = random_structure(random.Random(seed), max_points=5)
    assert validate_structure(S) == []


def test_every_mutation_has_witness():
    rng = random.Random(3)
    for _ in range(30):
        S = random_structure(rng, max_points=4, min_points=2)
        d = [list(r) for r in S.metric]
        i, j = rng.sample(range(S.size), 2)
        d[i][j] = d[i][j] + 2
        T = make_structure(S.signature, S.labels, d, S.constants, S.functions, S.relations)
        report = validate_structure(T)
        assert report and all(v.witness for v in report)
        assert "metric-symmetry" in {v.axiom for v in report}
