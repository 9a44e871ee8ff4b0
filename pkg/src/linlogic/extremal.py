"""Elementary submodels, maximizer closures, minimal and extremal models, suites."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .convex import extreme_subset, is_face_region, lp_solve, eq, same_point
from .parser import print_formula
from .structures import Evaluator, FiniteStructure, make_structure
from .syntax import Condition, Const, Dist, Var, linear_combination
from .typespace import (
    COEFF_POOL, FragmentParams, compile_partial_type, extreme_over, extreme_types,
    generate_fragment, over_space, realized_types, restrict_coords, sigma_face,
    sigma_marginals_ok, tp_over, tuple_index,
)

EXHAUSTIVE_LIMIT = 12


class NotClosed(ValueError):
    def __init__(self, witness):
        super().__init__(f"subset not closed: {witness}")
        self.witness = witness


def closure_witness(S: FiniteStructure, points):
    """None if ``points`` is closed under constants and functions, else a witness."""
    pts = set(points)
    for c in S.signature.constants:
        if S.constants[c] not in pts:
            return {"symbol": c, "args": [], "value": S.labels[S.constants[c]]}
    for sym in S.signature.functions:
        table = S.functions[sym.name]
        for args in itertools.product(sorted(pts), repeat=sym.arity):
            if table[args] not in pts:
                return {"symbol": sym.name, "args": [S.labels[a] for a in args],
                        "value": S.labels[table[args]]}
    return None


@dataclass(eq=False)
class SubmodelCandidate:
    structure: FiniteStructure
    points: tuple

    def __post_init__(self):
        self.points = tuple(sorted(set(self.points)))
        if not self.points:
            raise ValueError("empty point set")
        w = closure_witness(self.structure, self.points)
        if w is not None:
            raise NotClosed(w)

    @property
    def labels(self):
        return tuple(self.structure.labels[p] for p in self.points)

    def induced(self) -> FiniteStructure:
        S = self.structure
        pos = {p: i for i, p in enumerate(self.points)}
        metric = [[S.metric[a][b] for b in self.points] for a in self.points]
        consts = {c: pos[S.constants[c]] for c in S.signature.constants}
        funcs = {s.name: {tuple(pos[a] for a in args): pos[S.functions[s.name][args]]
                          for args in itertools.product(self.points, repeat=s.arity)}
                 for s in S.signature.functions}
        rels = {s.name: {tuple(pos[a] for a in args): S.relations[s.name][args]
                         for args in itertools.product(self.points, repeat=s.arity)}
                for s in S.signature.relations}
        return make_structure(S.signature, self.labels, metric, consts, funcs, rels, S.mode, S.eps)


def _differs(a, b, tol):
    return a != b if tol == 0 else abs(a - b) > tol


def is_elementary_submodel(S: FiniteStructure, K, fragment):
    """Compare every fragment formula on K with its value in S.

    Checks the fragment's sentences, then each context's basis and the
    quantified formulas recorded during generation.  Returns
    ``(True, None)`` or ``(False, witness)`` for the first mismatch.
    """
    if not isinstance(K, SubmodelCandidate):
        K = SubmodelCandidate(S, K)
    tol = S.tolerance
    ev = Evaluator(S, domain=K.points)
    for phi, value in fragment.sentences:
        got = ev(phi, {})
        if _differs(got, value, tol):
            return False, _witness(S, phi, 0, (), got, value)
    for m, ctx in sorted(fragment.contexts.items()):
        tuples = list(itertools.product(K.points, repeat=m))
        pairs = list(zip(ctx.formulas, ctx.tables)) + list(ctx.extras)
        for phi, table in pairs:
            for t in tuples:
                got = ev(phi, dict(zip(ctx.variables, t)))
                want = table[tuple_index(S, t)]
                if _differs(got, want, tol):
                    return False, _witness(S, phi, m, t, got, want)
    return True, None


def _witness(S, phi, m, t, sub, full):
    return {"formula": print_formula(phi), "context": m, "tuple": [S.labels[a] for a in t],
            "submodel": sub, "full": full}


# ------------------------------------------------------------ closure

def default_family():
    x, a, b = Var("x"), Var("_a"), Var("_b")
    return [(Dist(x, a), "x", ("_a",)),
            (linear_combination([1, 1], [Dist(x, a), Dist(x, b)]), "x", ("_a", "_b"))]


def maximizer_closure(S: FiniteStructure, seeds, family=None, argmin=False, trace=None):
    """Add every maximizer of each template with parameters from the current set.

    ``family`` lists (formula, target variable, parameter variables).
    Ties add all maximizers.  ``trace`` (a list) collects the additions.
    """
    cur = set(seeds)
    if not cur:
        raise ValueError("empty seed set")
    family = family if family is not None else default_family()
    tol = S.tolerance
    changed = True
    while changed:
        changed = False
        for phi, target, params in family:
            ev = Evaluator(S)
            for inst in itertools.product(sorted(cur), repeat=len(params)):
                asg = dict(zip(params, inst))
                vals = [ev(phi, {**asg, target: p}) for p in range(S.size)]
                picks = [max(vals)] + ([min(vals)] if argmin else [])
                new = set()
                for i, best in enumerate(picks):
                    new |= {p for p, v in enumerate(vals)
                            if (v >= best - tol if i == 0 else v <= best + tol)}
                added = new - cur
                if added:
                    cur |= added
                    changed = True
                    if trace is not None:
                        trace.append({"template": print_formula(phi),
                                      "parameters": [S.labels[p] for p in inst],
                                      "added": [S.labels[p] for p in sorted(added)]})
    return tuple(sorted(cur))


# ------------------------------------------------------ minimal, extremal

def _elementary_ok(S, pts, fragment):
    if closure_witness(S, pts) is not None:
        return False
    return is_elementary_submodel(S, SubmodelCandidate(S, pts), fragment)[0]


def minimal_submodel(S: FiniteStructure, fragment, strategy="exhaustive", limit=EXHAUSTIVE_LIMIT):
    if strategy == "exhaustive":
        if S.size > limit:
            raise ValueError(f"exhaustive search is limited to {limit} points; use greedy")
        for k in range(1, S.size + 1):
            for pts in itertools.combinations(range(S.size), k):
                if _elementary_ok(S, pts, fragment):
                    return SubmodelCandidate(S, pts)
        raise AssertionError("the whole structure is always elementary")
    if strategy == "greedy":
        cur = list(range(S.size))
        progress = True
        while progress:
            progress = False
            for p in cur:
                trial = [q for q in cur if q != p]
                if trial and _elementary_ok(S, trial, fragment):
                    cur = trial
                    progress = True
                    break
        return SubmodelCandidate(S, cur)
    raise ValueError(f"unknown strategy {strategy!r}")


def is_extremal(S: FiniteStructure, fragment, n_max=1, points=None):
    """(True, None) if every realized n-type (n <= n_max) is extreme, else the first witness."""
    for n in range(1, n_max + 1):
        TS = realized_types(S, n, fragment, points)
        ext = set(extreme_subset(TS.points, TS.eps))
        for i, v in enumerate(TS.vectors):
            if i not in ext:
                return False, {"n": n, "tuple": [S.labels[a] for a in v.realizers[0]]}
    return True, None


def minimal_model_law(S, fragment, K, n_max=2):
    """Per n: do the types realized in K coincide with the extreme types of S?"""
    out = {}
    for n in range(1, n_max + 1):
        inner = realized_types(S, n, fragment, K.points).points
        ext = [v.coords for v in extreme_types(realized_types(S, n, fragment))]
        eps = S.tolerance
        out[n] = (all(any(same_point(a, b, eps) for b in ext) for a in inner)
                  and all(any(same_point(a, b, eps) for b in inner) for a in ext))
    return out


# ------------------------------------------------------------- suites

@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    counterexamples: list = field(default_factory=list)
    skipped: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.counterexamples

    def as_dict(self):
        return {"suite": self.name, "cases": self.cases, "skipped_unsaturated": self.skipped,
                "passed": self.passed, "counterexamples": self.counterexamples,
                "details": self.details}


def _counterexample(S, fragment, witness, suite):
    from .fileformat import format_structure
    return {"suite": suite, "structure": format_structure(S),
            "fragment": {**fragment.summary(), "n": fragment.n, "params": fragment.params.as_dict()},
            "witness": witness}


def check_restriction(S, fragment, n=1):
    """Witnesses of extreme (n+1)-vectors whose restriction is not extreme."""
    ext_n = [v.coords for v in extreme_types(realized_types(S, n, fragment))]
    out = []
    for v in extreme_types(realized_types(S, n + 1, fragment)):
        r = restrict_coords(fragment, v.coords, n)
        if not any(same_point(r, e, S.tolerance) for e in ext_n):
            out.append({"tuple": [S.labels[a] for a in v.realizers[0]], "n": n})
    return out


def check_pair(S, fragment):
    """tp(ab) extreme iff tp(b) extreme and a extreme over b."""
    eps = S.tolerance
    one = realized_types(S, 1, fragment)
    ext1 = {t[0] for v in extreme_types(one) for t in v.realizers}
    two = realized_types(S, 2, fragment)
    ext2 = {t for v in extreme_types(two) for t in v.realizers}
    out = []
    for b in range(S.size):
        over = extreme_over(S, fragment, 1, (b,))
        for a in range(S.size):
            lhs = (a, b) in ext2
            coords = tp_over(S, fragment, (a,), (b,)).coords
            over_ok = any(same_point(coords, v.coords, eps) for v in over)
            rhs = b in ext1 and over_ok
            if lhs != rhs:
                out.append({"a": S.labels[a], "b": S.labels[b], "tp_ab_extreme": lhs,
                            "tp_b_extreme": b in ext1, "a_extreme_over_b": over_ok})
    return out


def check_symmetry(S, fragment):
    """a extreme over b iff b extreme over a."""
    eps = S.tolerance
    over = {}
    for b in range(S.size):
        ext = extreme_over(S, fragment, 1, (b,))
        over[b] = {a for a in range(S.size)
                   if any(same_point(tp_over(S, fragment, (a,), (b,)).coords, v.coords, eps) for v in ext)}
    out = []
    for a, b in itertools.combinations(range(S.size), 2):
        if (a in over[b]) != (b in over[a]):
            out.append({"a": S.labels[a], "b": S.labels[b],
                        "a_over_b": a in over[b], "b_over_a": b in over[a]})
    return out


def check_sigma(S, fragment):
    """For extreme 1-types p, q the Sigma region is a face with the right marginals."""
    ext = extreme_types(realized_types(S, 1, fragment))
    TS2 = realized_types(S, 2, fragment)
    out = []
    for p in ext:
        for q in ext:
            gamma, verdict, r = sigma_face(S, fragment, p, q, TS2)
            if not verdict.is_face or not sigma_marginals_ok(S, fragment, TS2, verdict, p, q):
                out.append({"p": [S.labels[a] for a in p.realizers[0]],
                            "q": [S.labels[a] for a in q.realizers[0]],
                            "r": r, "status": verdict.status})
    return out


def check_face_parameter(S, fragment, gamma):
    """gamma over (x, y): a face of the 2-type space; each instance y = b is a face or empty."""
    pt = compile_partial_type(fragment, 2, gamma) if not hasattr(gamma, "constraints") else gamma
    TS2 = realized_types(S, 2, fragment)
    base = is_face_region(TS2.points, pt.constraints, TS2.eps)
    if base.status == "not-face":
        return None  # precondition fails: not a face to begin with
    out = []
    for b in range(S.size):
        V = [v.coords for v in over_space(S, fragment, 1, (b,))]
        verdict = is_face_region(V, pt.constraints, S.tolerance)
        if verdict.status == "not-face":
            out.append({"b": S.labels[b], "status": verdict.status,
                        "point": list(verdict.point)})
    return out


def _exposed(ctx_formulas, V, rng, exact):
    coeffs = [rng.choice(COEFF_POOL) for _ in ctx_formulas]
    vals = [sum((Fraction(c) * x if exact else float(c) * x for c, x in zip(coeffs, v)),
                Fraction(0) if exact else 0.0) for v in V]
    theta = linear_combination(coeffs, ctx_formulas)
    return theta, max(vals)


def _region_max(V, C, theta_vals, eps):
    zero = Fraction(0) if eps == 0 else 0.0
    one = zero + 1
    from .convex import _hull_rows
    res = lp_solve([eq([one] * len(V), one)] + _hull_rows(V, C), len(V), objective=theta_vals,
                   sense="max", nonneg=True, eps=eps)
    return res.value if res.feasible else None


def check_face_combinators(S, fragment, rng, n=1, samples=3):
    """Intersections of exposed faces, and theta-augmentations, stay faces (or empty)."""
    from .typespace import formula_table
    ctx = fragment.context(n)
    TS = realized_types(S, n, fragment)
    V = TS.points
    exact = S.mode == "exact"
    eps = S.tolerance
    out = []
    for _ in range(samples):
        th1, m1 = _exposed(ctx.formulas, V, rng, exact)
        th2, m2 = _exposed(ctx.formulas, V, rng, exact)
        g1 = [Condition(Const(Fraction(m1)), "<=", th1)]
        g2 = [Condition(Const(Fraction(m2)), "<=", th2)]
        for label, conds in (("single", g1), ("union", g1 + g2), ("self-union", g1 + g1)):
            verdict = is_face_region(V, compile_partial_type(fragment, n, conds).constraints, eps)
            if verdict.status == "not-face":
                out.append({"case": label, "conditions": _show(conds)})
        # augmentation by 0 <= theta - max over the face
        th3, _ = _exposed(ctx.formulas, V, rng, exact)
        pt1 = compile_partial_type(fragment, n, g1)
        vals = list(formula_table(th3, S, ctx.variables))
        theta_vals = [vals[tuple_index(S, v.realizers[0])] for v in TS.vectors]
        top = _region_max(V, pt1.constraints, theta_vals, eps)
        if top is None:
            continue
        for shift, want in ((0, ("face",)), (1, ("empty",))):
            aug = g1 + [Condition(Const(Fraction(top) + shift), "<=", th3)]
            verdict = is_face_region(V, compile_partial_type(fragment, n, aug).constraints, eps)
            if verdict.status not in want:
                out.append({"case": f"augmented+{shift}", "conditions": _show(aug),
                            "status": verdict.status})
    return out


def _show(conds):
    from .parser import print_condition
    return [print_condition(c) for c in conds]


def _structures(structures):
    from .corpus import load_corpus
    out = []
    for s in structures:
        out.append((s, load_corpus(s).structure) if isinstance(s, str) else (None, s))
    return out


def suite_restriction_extreme(cases=200, seed=7, params=None, structures=None, n=1):
    """Random structures (or the given ones) with span-saturated fragments."""
    params = params or FragmentParams()
    report = SuiteReport("restriction-extreme")
    items = _structures(structures) if structures else [
        (None, None) for _ in range(cases)]
    for i, (name, S) in enumerate(items):
        if S is None:
            from .randgen import random_structure
            S = random_structure(random.Random(f"restriction:{seed}:{i}"))
        frag = generate_fragment(S, n + 1, FragmentParams(**{**params.as_dict(), "seed": seed + i}))
        report.cases += 1
        if not frag.saturated:
            report.skipped += 1
            continue
        for w in check_restriction(S, frag, n):
            report.counterexamples.append(_counterexample(S, frag, {**w, "case": i, "name": name},
                                                          report.name))
    return report


def _pairwise_suite(name, check, structures, cases, seed, params):
    params = params or FragmentParams()
    report = SuiteReport(name)
    items = _structures(structures or ())
    if cases:
        from .randgen import random_structure
        items += [(None, random_structure(random.Random(f"{name}:{seed}:{i}"))) for i in range(cases)]
    for i, (label, S) in enumerate(items):
        frag = generate_fragment(S, 1, FragmentParams(**{**params.as_dict(), "seed": seed + i}))
        report.cases += 1
        if not frag.saturated:
            report.skipped += 1
            continue
        for w in check(S, frag):
            report.counterexamples.append(_counterexample(S, frag, {**w, "case": i, "name": label}, name))
    return report


def suite_pair_extreme(structures=("M2", "U2", "DC3", "singleton"), cases=0, seed=7, params=None):
    return _pairwise_suite("pair-extreme", check_pair, structures, cases, seed, params)


def suite_over_symmetry(structures=("M2", "U2", "DC3", "singleton"), cases=0, seed=7, params=None):
    return _pairwise_suite("over-symmetry", check_symmetry, structures, cases, seed, params)


def suite_sigma_face(structures=("M2", "U2", "DC3", "singleton"), cases=0, seed=7, params=None):
    return _pairwise_suite("sigma-face", check_sigma, structures, cases, seed, params)


DEFAULT_GAMMAS = {"DC3": ["d(x,k0)=1; d(x,k1)=1; d(x,k2)=1", "d(x,k0)=1; d(y,k0)=0"],
                  "U2": ["d(x,y) <= 0"], "M2": ["d(x,y) <= 0", "P(x) + P(y) >= 2"]}


def suite_face_parameter(structures=("M2", "U2", "DC3", "singleton"), gammas=None, seed=7, params=None):
    """Each gamma over (x, y) must give a face (or nothing) for every parameter y = b."""
    params = params or FragmentParams()
    report = SuiteReport("face-parameter")
    for i, (label, S) in enumerate(_structures(structures)):
        frag = generate_fragment(S, 1, FragmentParams(**{**params.as_dict(), "seed": seed + i}))
        chosen = gammas.get(label, []) if gammas is not None else DEFAULT_GAMMAS.get(label, [])
        todo = [""] + list(chosen)
        for text in todo:
            report.cases += 1
            found = check_face_parameter(S, frag, text)
            if found is None:
                report.details.setdefault("not_faces", []).append({"name": label, "gamma": text})
                continue
            for w in found:
                report.counterexamples.append(_counterexample(S, frag, {**w, "name": label, "gamma": text},
                                                              report.name))
    return report


def suite_face_combinators(structures=("M2", "U2", "DC3", "singleton"), cases=0, seed=7, params=None,
                           samples=3):
    params = params or FragmentParams()
    report = SuiteReport("face-combinators")
    items = _structures(structures or ())
    if cases:
        from .randgen import random_structure
        items += [(None, random_structure(random.Random(f"combinators:{seed}:{i}"))) for i in range(cases)]
    for i, (label, S) in enumerate(items):
        frag = generate_fragment(S, 1, FragmentParams(**{**params.as_dict(), "seed": seed + i}))
        rng = random.Random(f"combinators-theta:{seed}:{i}")
        report.cases += 1
        for n in (1, 2):
            for w in check_face_combinators(S, frag, rng, n, samples):
                report.counterexamples.append(_counterexample(S, frag, {**w, "n": n, "name": label},
                                                              report.name))
    return report


SUITES = {
    "restriction-extreme": suite_restriction_extreme,
    "pair-extreme": suite_pair_extreme,
    "over-symmetry": suite_over_symmetry,
    "sigma-face": suite_sigma_face,
    "face-parameter": suite_face_parameter,
    "face-combinators": suite_face_combinators,
}


def reverify(counterexample) -> bool:
    """Rebuild structure and fragment from a serialized counterexample and recheck it.

    True when the violation reproduces.
    """
    from .fileformat import parse_structure_text
    S = parse_structure_text(counterexample["structure"])
    f = counterexample["fragment"]
    frag = generate_fragment(S, f["n"], FragmentParams(**f["params"]))
    w = counterexample["witness"]
    suite = counterexample["suite"]
    if suite == "restriction-extreme":
        found = check_restriction(S, frag, w["n"])
        return any(x["tuple"] == w["tuple"] for x in found)
    if suite == "pair-extreme":
        return any(x["a"] == w["a"] and x["b"] == w["b"] for x in check_pair(S, frag))
    if suite == "over-symmetry":
        return any(x["a"] == w["a"] and x["b"] == w["b"] for x in check_symmetry(S, frag))
    if suite == "sigma-face":
        return any(x["p"] == w["p"] and x["q"] == w["q"] for x in check_sigma(S, frag))
    if suite == "face-parameter":
        found = check_face_parameter(S, frag, w["gamma"]) or []
        return any(x["b"] == w["b"] for x in found)
    if suite == "face-combinators":
        from .parser import parse_conditions
        conds = parse_conditions("; ".join(w["conditions"]), S.signature)
        TS = realized_types(S, w["n"], frag)
        verdict = is_face_region(TS.points, compile_partial_type(frag, w["n"], conds).constraints,
                                 S.tolerance)
        return verdict.status == w.get("status", "not-face") and verdict.status != "face"
    raise ValueError(f"unknown suite {suite!r}")
