"""Command-line front end.

Exit codes: 0 success, 1 a verdict failed where ``--expect`` asked for a
pass (or a suite found counterexamples), 2 bad input.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from fractions import Fraction

from . import corpus as corpus_mod
from .convex import verify_face_verdict
from .extremal import (
    SUITES, SubmodelCandidate, NotClosed, is_elementary_submodel, is_extremal,
    maximizer_closure, minimal_submodel,
)
from .fileformat import StructureFileError, load_structure
from .parser import ParseError, parse_formula, print_formula
from .structures import (
    FiniteStructure, InvalidStructure, eval_formula, make_structure, validate_structure,
)
from .syntax import SignatureError
from .typespace import (
    FragmentError, FragmentParams, compile_partial_type, extreme_types, generate_fragment,
    is_face_partial_type, realized_types, sigma_face, sigma_marginals_ok, type_metric,
)
from .ultramean import Charge, build_ultramean, check_los
from .report import emit_report, make_report


class InputError(ValueError):
    pass


# ------------------------------------------------------------- helpers

def _convert(S: FiniteStructure, mode, eps):
    if mode is None and eps is None:
        return S
    mode = mode or S.mode
    eps = S.eps if eps is None else eps
    conv = (lambda v: Fraction(v)) if mode == "exact" else float
    return make_structure(S.signature, S.labels, [[conv(v) for v in row] for row in S.metric],
                          S.constants, S.functions,
                          {k: {t: conv(v) for t, v in tab.items()} for k, tab in S.relations.items()},
                          mode, eps)


def _load_one(source, args, validate=True):
    if source.startswith("@"):
        S = load_structure(source[1:], validate=validate)
    else:
        S = corpus_mod.load_corpus(source).structure
    return _convert(S, args.mode, args.eps)


def _structure(args, validate=True):
    if args.file and args.corpus:
        raise InputError("give either --corpus or --file, not both")
    if args.file:
        S = load_structure(args.file, validate=validate)
    elif args.corpus:
        S = corpus_mod.load_corpus(args.corpus).structure
    else:
        raise InputError("no structure given (use --corpus NAME or --file PATH)")
    return _convert(S, args.mode, args.eps)


def _params(args):
    return FragmentParams(mode=args.fragment, depth=args.depth, rounds=args.rounds,
                          samples=args.samples, seed=args.seed, extra=args.extra)


def _fragment(S, args, n):
    params = _params(args)
    if params.mode == "listed":
        if not args.basis:
            raise InputError("listed fragments need --basis")
        phis = [parse_formula(t, S.signature) for t in args.basis.split(";") if t.strip()]
        return generate_fragment(S, n, params, formulas=phis)
    return generate_fragment(S, n, params)


def _tuple(S, text):
    if not text:
        raise InputError("empty tuple")
    out = []
    for name in text.split(","):
        name = name.strip()
        if name not in S.labels:
            raise InputError(f"unknown point {name!r}")
        out.append(S.point(name))
    return tuple(out)


def _assignment(S, text):
    asg = {}
    for part in (text or "").split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise InputError(f"bad assignment {part!r}; use var=label")
        var, label = (s.strip() for s in part.split("=", 1))
        if label not in S.labels:
            raise InputError(f"unknown point {label!r}")
        asg[var] = S.point(label)
    return asg


def _vectors(S, vs):
    return [{"vector": list(v.display()),
             "realizers": [",".join(S.labels[a] for a in t) for t in v.realizers]} for v in vs]


def _verdict_block(verdict, TS):
    cert = verdict.certificate()
    if verdict.status == "face":
        cert["vertices"] = [list(TS.vectors[i].display()) for i in verdict.vertices]
    elif verdict.status == "not-face":
        cert["excluded"] = list(TS.vectors[verdict.excluded].display())
        cert["point"] = list(verdict.point[1:])
    return cert


# ------------------------------------------------------------ commands

def cmd_eval(args):
    S = _structure(args)
    if not args.formula:
        raise InputError("--formula is required")
    phi = parse_formula(args.formula, S.signature)
    value = eval_formula(phi, S, _assignment(S, args.assign))
    return make_report("eval", {"structure": _name(args), "formula": print_formula(phi),
                                "assign": args.assign or ""}, results={"value": value}), 0


def cmd_validate(args):
    S = _structure(args, validate=False)
    report = validate_structure(S)
    results = {"valid": not report, "violations": [v.as_dict() for v in report]}
    return make_report("validate", {"structure": _name(args)}, results=results), (0 if not report else 2)


def _factors(args):
    names = [s for s in (args.factors or "").split(",") if s.strip()]
    if not names:
        raise InputError("--factors is required (comma-separated corpus names or @paths)")
    factors = [_load_one(s.strip(), args) for s in names]
    if args.weights:
        ws = [Fraction(w) if "." not in w else float(w) for w in args.weights.split(",")]
    else:
        ws = [Fraction(1, len(factors))] * len(factors)
    try:
        mu = Charge(tuple(ws))
    except ValueError as e:
        raise InputError(str(e)) from None
    return names, factors, mu


def cmd_ultramean(args):
    names, factors, mu = _factors(args)
    U = build_ultramean(factors, mu)
    S = U.structure
    results = {"points": list(S.labels),
               "metric": [list(row) for row in S.metric],
               "relations": {k: {",".join(S.labels[a] for a in t): v for t, v in sorted(tab.items())}
                             for k, tab in S.relations.items()},
               "constants": {c: S.labels[i] for c, i in S.constants.items()}}
    return make_report("ultramean", {"factors": names, "weights": list(mu.weights)}, results=results), 0


def cmd_los_check(args):
    names, factors, mu = _factors(args)
    U = build_ultramean(factors, mu)
    sig = factors[0].signature
    if args.formula:
        phi = parse_formula(args.formula, sig)
        asg = {}
        for part in (args.assign or "").split(","):
            if not part.strip():
                continue
            var, labels = (s.strip() for s in part.split("=", 1))
            parts = labels.split(".")
            if len(parts) != len(factors):
                raise InputError(f"class for {var} needs one label per factor, separated by '.'")
            asg[var] = tuple(S.point(p) for S, p in zip(factors, parts))
        lhs, rhs, ok = check_los(phi, factors, mu, asg, U)
        results = {"lhs": lhs, "rhs": rhs, "equal": ok}
        return make_report("los-check", {"factors": names, "formula": print_formula(phi)},
                           results=results), (0 if ok else 1)
    from .randgen import random_formula
    rng = random.Random(args.seed)
    fails = []
    for i in range(args.cases):
        phi = random_formula(rng, sig, ("x", "y"), 3, 2)
        asg = {v: tuple(rng.randrange(S.size) for S in factors) for v in ("x", "y")}
        lhs, rhs, ok = check_los(phi, factors, mu, asg, U)
        if not ok:
            fails.append({"formula": print_formula(phi), "lhs": lhs, "rhs": rhs})
    return make_report("los-check", {"factors": names, "cases": args.cases, "seed": args.seed},
                       results={"failures": len(fails)}, counterexamples=fails), (0 if not fails else 1)


def cmd_typespace(args):
    S = _structure(args)
    frag = _fragment(S, args, args.n)
    TS = realized_types(S, args.n, frag)
    return make_report("typespace", {"structure": _name(args), "n": args.n}, frag.summary(),
                       {"vectors": _vectors(S, TS.vectors)}), 0


def cmd_extreme(args):
    S = _structure(args)
    frag = _fragment(S, args, args.n)
    TS = realized_types(S, args.n, frag)
    ext = extreme_types(TS)
    return make_report("extreme", {"structure": _name(args), "n": args.n}, frag.summary(),
                       {"realized": len(TS.vectors), "extreme": _vectors(S, ext)}), 0


def cmd_face(args):
    S = _structure(args)
    frag = _fragment(S, args, args.n)
    TS = realized_types(S, args.n, frag)
    gamma = compile_partial_type(frag, args.n, args.gamma or "")
    verdict = is_face_partial_type(TS, gamma)
    verified = verify_face_verdict(verdict, TS.points, gamma.constraints, TS.eps)
    results = {"verdict": verdict.status, "certificate_verified": verified}
    if verdict.status == "face":
        results["vertices"] = _vectors(S, [TS.vectors[i] for i in verdict.vertices])
    code = 1 if args.expect and not verdict.is_face else 0
    return make_report("face", {"structure": _name(args), "gamma": args.gamma or "", "n": args.n},
                       frag.summary(), results, [_verdict_block(verdict, TS)]), code


def _pair(args, S):
    if not args.a or not args.b:
        raise InputError("--a and --b are required")
    a, b = _tuple(S, args.a), _tuple(S, args.b)
    if len(a) != len(b):
        raise InputError("tuples of different lengths")
    return a, b


def cmd_type_metric(args):
    S = _structure(args)
    a, b = _pair(args, S)
    frag = _fragment(S, args, len(a))
    TS = realized_types(S, len(a), frag)
    p, q = TS.vector_of(a), TS.vector_of(b)
    return make_report("type-metric", {"structure": _name(args), "a": args.a, "b": args.b},
                       frag.summary(), {"distance": type_metric(S, p, q),
                                        "p": list(p.display()), "q": list(q.display())}), 0


def cmd_sigma_face(args):
    S = _structure(args)
    a, b = _pair(args, S)
    n = len(a)
    frag = generate_fragment(S, 2 * n - 1, _params(args))  # contexts up to 2n
    TS = realized_types(S, n, frag)
    TS2 = realized_types(S, 2 * n, frag)
    p, q = TS.vector_of(a), TS.vector_of(b)
    gamma, verdict, r = sigma_face(S, frag, p, q, TS2)
    marg = verdict.is_face and sigma_marginals_ok(S, frag, TS2, verdict, p, q)
    results = {"r": r, "verdict": verdict.status, "marginals_ok": marg,
               "conditions": len(gamma.conditions)}
    if verdict.is_face:
        results["vertices"] = _vectors(S, [TS2.vectors[i] for i in verdict.vertices])
    code = 1 if args.expect and not (verdict.is_face and marg) else 0
    return make_report("sigma-face", {"structure": _name(args), "a": args.a, "b": args.b},
                       frag.summary(), results, [_verdict_block(verdict, TS2)]), code


def _subset(S, text):
    return _tuple(S, text) if text else tuple(range(S.size))


def cmd_elementary(args):
    S = _structure(args)
    frag = _fragment(S, args, args.n)
    K = SubmodelCandidate(S, _subset(S, args.subset))
    ok, witness = is_elementary_submodel(S, K, frag)
    code = 1 if args.expect and not ok else 0
    return make_report("elementary", {"structure": _name(args), "subset": list(K.labels)},
                       frag.summary(), {"elementary": ok, "witness": witness or {}}), code


def cmd_closure(args):
    S = _structure(args)
    seeds = _tuple(S, args.seeds) if args.seeds else ()
    if not seeds:
        raise InputError("--seeds is required")
    trace = []
    pts = maximizer_closure(S, seeds, argmin=args.argmin, trace=trace)
    return make_report("closure", {"structure": _name(args), "seeds": args.seeds, "argmin": args.argmin},
                       results={"closure": [S.labels[p] for p in pts], "size": len(pts),
                                "steps": trace}), 0


def cmd_minimal(args):
    S = _structure(args)
    frag = _fragment(S, args, args.n)
    K = minimal_submodel(S, frag, args.strategy)
    return make_report("minimal", {"structure": _name(args), "strategy": args.strategy, "n": args.n},
                       frag.summary(), {"points": list(K.labels), "size": len(K.points)}), 0


def cmd_extremal(args):
    S = _structure(args)
    frag = _fragment(S, args, args.n)
    ok, witness = is_extremal(S, frag, args.n)
    code = 1 if args.expect and not ok else 0
    return make_report("extremal", {"structure": _name(args), "n_max": args.n}, frag.summary(),
                       {"extremal": ok, "witness": witness or {}}), code


def cmd_suite(args):
    fn = SUITES.get(args.name)
    if fn is None:
        raise InputError(f"unknown suite {args.name!r}; choose from {', '.join(SUITES)}")
    params = _params(args)
    structures = [s for s in (args.corpus or "").split(",") if s.strip()] or None
    if args.name == "restriction-extreme":
        rep = fn(cases=args.cases, seed=args.seed, params=params, structures=structures)
    elif args.name == "face-parameter":
        rep = fn(structures=structures or ("M2", "U2", "DC3", "singleton"), seed=args.seed, params=params)
    else:
        kw = {"cases": args.cases, "seed": args.seed, "params": params}
        rep = fn(structures=structures if structures is not None else ("M2", "U2", "DC3", "singleton"), **kw)
    d = rep.as_dict()
    results = {k: d[k] for k in ("suite", "cases", "skipped_unsaturated", "passed")}
    results["details"] = d["details"]
    return make_report("suite", {"name": args.name, "cases": args.cases, "seed": args.seed,
                                 "corpus": structures or []}, {"params": params.as_dict()},
                       results, counterexamples=d["counterexamples"]), (0 if rep.passed else 1)


def cmd_corpus(args):
    names = [args.corpus] if args.corpus else list(corpus_mod.NAMES)
    rows = []
    bad = False
    for name in names:
        e = corpus_mod.load_corpus(name)
        row = {"name": e.name, "version": e.version, "points": e.structure.size,
               "mode": e.structure.mode, "description": e.description}
        if args.selftest:
            fails = corpus_mod.selftest(e)
            row["selftest"] = "ok" if not fails else "; ".join(fails)
            bad |= bool(fails)
        rows.append(row)
    return make_report("corpus", {"selftest": args.selftest}, results={"entries": rows}), (1 if bad else 0)


def _name(args):
    return args.corpus or args.file


COMMANDS = {
    "eval": cmd_eval, "validate": cmd_validate, "ultramean": cmd_ultramean,
    "los-check": cmd_los_check, "typespace": cmd_typespace, "extreme": cmd_extreme,
    "face": cmd_face, "type-metric": cmd_type_metric, "sigma-face": cmd_sigma_face,
    "elementary": cmd_elementary, "closure": cmd_closure, "minimal": cmd_minimal,
    "extremal": cmd_extremal, "suite": cmd_suite, "corpus": cmd_corpus,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", help="built-in structure name (suite: comma-separated list)")
    common.add_argument("--file", help="structure file")
    common.add_argument("--mode", choices=("exact", "float"))
    common.add_argument("--eps", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--depth", type=int, default=2, help="term depth cap")
    common.add_argument("--rounds", type=int, default=8)
    common.add_argument("--samples", type=int, default=32)
    common.add_argument("--extra", type=int, default=1, help="contexts beyond n")
    common.add_argument("--fragment", choices=("listed", "enumerated", "saturated"), default="saturated")
    common.add_argument("--basis", help="listed fragment formulas, ';'-separated")
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--json", action="store_true")
    common.add_argument("--out")
    common.add_argument("--formula")
    common.add_argument("--assign", help="x=a0,y=a1 (los-check: x=a0.a1 per factor)")
    common.add_argument("--gamma", help="';'-separated conditions")
    common.add_argument("--cases", type=int, default=100)
    common.add_argument("--factors", help="comma-separated corpus names or @files")
    common.add_argument("--weights", help="comma-separated charge weights")
    common.add_argument("--a")
    common.add_argument("--b")
    common.add_argument("--subset")
    common.add_argument("--seeds")
    common.add_argument("--argmin", action="store_true")
    common.add_argument("--strategy", choices=("exhaustive", "greedy"), default="exhaustive")
    common.add_argument("--expect", action="store_true", help="exit 1 unless the verdict is a pass")
    common.add_argument("--selftest", action="store_true")

    p = argparse.ArgumentParser(prog="linlogic", description="Workbench for linear continuous logic")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "suite":
            sp.add_argument("name", help=", ".join(SUITES))
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        report, code = COMMANDS[args.command](args)
    except (InputError, ParseError, StructureFileError, InvalidStructure, FragmentError,
            SignatureError, NotClosed, KeyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e, InvalidStructure):
            for v in e.violations:
                print(f"  {v.axiom}: {', '.join(map(str, v.witness))} {v.message}", file=sys.stderr)
        return 2
    report["timing_ms"] = round((time.perf_counter() - t0) * 1000)
    text = emit_report(report, "json" if args.json else "table")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
