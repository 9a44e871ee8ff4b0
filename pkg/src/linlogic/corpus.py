"""Built-in structures with documented expected results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .structures import make_structure
from .syntax import Signature
from .typespace import FragmentParams
from .ultramean import Charge, build_ultramean

CORPUS_VERSION = "1"
NAMES = ("M2", "U2", "DC3", "DC3-open", "C8", "singleton")


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    structure: object
    description: str
    n: int = 1                      # default fragment arity
    formulas: tuple = ()            # formula texts over the variables x, y
    expected: dict = field(default_factory=dict)
    version: str = CORPUS_VERSION

    def fragment_params(self, **overrides):
        return FragmentParams(**overrides)


M2_SIG = Signature.build(["c0"], relations={"P": (1, 1)})
DC_SIG = Signature.build(["k0", "k1", "k2"])
EMPTY_SIG = Signature()


def _m2():
    return make_structure(M2_SIG, ["a0", "a1"], [[0, 1], [1, 0]], {"c0": 0},
                          relations={"P": {(0,): 0, (1,): 1}})


def _dc(with_witness=True):
    labels = ["b0", "b1", "b2", "b3"] if with_witness else ["b0", "b1", "b2"]
    k = len(labels)
    metric = [[0 if i == j else 1 for j in range(k)] for i in range(k)]
    return make_structure(DC_SIG, labels, metric, {"k0": 0, "k1": 1, "k2": 2})


def _c8():
    metric = []
    for i in range(8):
        row = []
        for j in range(8):
            step = min(abs(i - j), 8 - abs(i - j))
            row.append(math.sin(math.pi * step / 8))
        metric.append(row)
    return make_structure(EMPTY_SIG, [f"p{i}" for i in range(8)], metric, mode="float")


def _singleton():
    return make_structure(M2_SIG, ["s0"], [[0]], {"c0": 0}, relations={"P": {(0,): Fraction(1, 2)}})


_M2_FORMULAS = ("P(x)", "d(x, c0)", "sup x . P(x)", "d(x, y)", "P(x) + -1 * P(y)",
                "sup y . (d(x, y) + P(y))", "inf y . (1/2 * d(x, y) + P(x))")


def _build(name):
    if name == "M2":
        return CorpusEntry(
            "M2", _m2(), "two points at distance 1, P marks a1, c0 names a0",
            formulas=_M2_FORMULAS,
            expected={"eval": {"sup x . P(x)": Fraction(1)}, "dims": {1: 2},
                      "types1": 2, "types2": 4, "extremal": True})
    if name == "U2":
        M = _m2()
        U = build_ultramean([M, M], Charge.of(Fraction(1, 2), Fraction(1, 2))).structure
        return CorpusEntry(
            "U2", U, "ultramean of two copies of M2 under the uniform charge",
            formulas=_M2_FORMULAS,
            expected={"P": {"[a0a0]": Fraction(0), "[a0a1]": Fraction(1, 2),
                            "[a1a0]": Fraction(1, 2), "[a1a1]": Fraction(1)},
                      "types1": [(0, 0), (Fraction(1, 2), Fraction(1, 2)), (1, 1)],
                      "extreme1": [(0, 0), (1, 1)], "listed": ("P(x)", "d(x, c0)"), "minimal": ("[a0a0]", "[a1a1]"),
                      "extremal": False, "dims": {1: 2}})
    if name == "DC3":
        return CorpusEntry(
            "DC3", _dc(True), "points b0..b3 pairwise at distance 1, k_i names b_i; b3 realizes the far type",
            formulas=("d(x, k0)", "d(x, k1) + d(x, k2)", "sup y . (d(x, y) + -1 * d(y, k0))"),
            expected={"dims": {1: 4}, "sigma": (1, 1, 1)})
    if name == "DC3-open":
        return CorpusEntry(
            "DC3-open", _dc(False), "DC3 without b3, so the far type is not realized",
            formulas=("d(x, k0)", "d(x, k1) + d(x, k2)"),
            expected={"dims": {1: 3}, "sigma": None})
    if name == "C8":
        return CorpusEntry(
            "C8", _c8(), "eight equally spaced points on a circle with chord distances sin(pi k/8)",
            n=2, formulas=("d(x, y)", "sup y . d(x, y)", "inf y . (d(x, y) + -1/2 * d(y, x))"),
            expected={"d": {("p0", "p4"): 1.0, ("p0", "p1"): math.sin(math.pi / 8)},
                      "closure": 8, "minimal": 8})
    if name == "singleton":
        return CorpusEntry(
            "singleton", _singleton(), "one point",
            formulas=("P(x)", "d(x, c0)", "sup y . d(x, y)"),
            expected={"types1": 1, "extremal": True})
    raise KeyError(f"unknown corpus entry {name!r}; choose from {', '.join(NAMES)}")


_CACHE = {}


def load_corpus(name) -> CorpusEntry:
    if name not in _CACHE:
        _CACHE[name] = _build(name)
    return _CACHE[name]


def selftest(entry: CorpusEntry) -> list:
    """Recheck the cheap documented expectations; returns failure messages."""
    from .extremal import is_extremal, maximizer_closure
    from .parser import parse_formula
    from .structures import eval_formula, validate_structure
    from .typespace import extreme_types, generate_fragment, realized_types

    S = entry.structure
    exp = entry.expected
    out = []
    if validate_structure(S):
        out.append("structure does not validate")
        return out
    for text, value in exp.get("eval", {}).items():
        got = eval_formula(parse_formula(text, S.signature), S)
        if got != value:
            out.append(f"eval {text}: {got} != {value}")
    for label, value in exp.get("P", {}).items():
        got = S.relations["P"][(S.point(label),)]
        if got != value:
            out.append(f"P({label}) = {got} != {value}")
    for (a, b), value in exp.get("d", {}).items():
        if abs(S.d(S.point(a), S.point(b)) - value) > S.eps:
            out.append(f"d({a},{b}) != {value}")
    if "listed" in exp:
        frag = generate_fragment(S, 1, FragmentParams(mode="listed"),
                                 formulas=[parse_formula(t, S.signature) for t in exp["listed"]])
        TS = realized_types(S, 1, frag)
        got = sorted(v.display() for v in TS.vectors)
        if got != sorted(tuple(map(Fraction, t)) for t in exp["types1"]):
            out.append(f"listed 1-types {got}")
        ext = sorted(v.display() for v in extreme_types(TS))
        if ext != sorted(tuple(map(Fraction, t)) for t in exp["extreme1"]):
            out.append(f"extreme 1-types {ext}")
    if "closure" in exp:
        got = maximizer_closure(S, [0])
        if len(got) != exp["closure"]:
            out.append(f"closure from {S.labels[0]} has {len(got)} points")
    if any(k in exp for k in ("dims", "types1", "types2", "extreme1", "extremal", "sigma")):
        frag = generate_fragment(S, 1)
        for m, dim in exp.get("dims", {}).items():
            if frag.dims.get(m) != dim:
                out.append(f"context {m} dimension {frag.dims.get(m)} != {dim}")
        TS = realized_types(S, 1, frag)
        t1 = exp.get("types1")
        if isinstance(t1, int) and len(TS.vectors) != t1:
            out.append(f"{len(TS.vectors)} realized 1-types, expected {t1}")
        if "types2" in exp and len(realized_types(S, 2, frag).vectors) != exp["types2"]:
            out.append("wrong number of realized 2-types")
        if "extremal" in exp:
            ok, _ = is_extremal(S, frag, 1)
            if ok != exp["extremal"]:
                out.append(f"is_extremal = {ok}")
        if "sigma" in exp:
            from .typespace import compile_partial_type, is_face_partial_type
            gamma = compile_partial_type(frag, 1, "d(x,k0)=1; d(x,k1)=1; d(x,k2)=1")
            verdict = is_face_partial_type(TS, gamma)
            want = exp["sigma"]
            if want is None:
                if verdict.status != "empty":
                    out.append(f"far-type region is {verdict.status}, expected empty")
            elif not verdict.is_face or [TS.vectors[i].display() for i in verdict.vertices] != [want]:
                out.append("far-type region is not the expected face")
    return out
