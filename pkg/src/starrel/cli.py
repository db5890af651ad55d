"""
Command-line driver
~~~~~~~~~~~~~~~~~~~
``starrel <command> ...`` with commands check, unfold, search, probe,
embed, axioms, pushout and combine. Exit status 0 means the command's
positive outcome (satisfied, converged, witness found, nonzero image, all
axioms pass), 1 the negative outcome or a domain error, 2 a usage error.
Domain errors are reported on stderr as ``{"error": ..., "message": ...}``.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import dsl
from . import ncexpr as nc
from .comatrix import ScalarRep, substitute_entries, unfold
from .errors import DslError, StarRelError
from .fdca import BlockIdeal, FDAlgebra, pushout_of_quotients, random_compatible_pair, lift_pair, verify_kernel_image, verify_square
from .gmembed import embed, is_zero_certified
from .matrep import RepTuple, op_norm, rep_from_json, rep_to_json
from .relations import EqZero, RelationSet, check, combine_to_single, run_axiom_harness
from .search import SearchConfig, find_representation, probe_norm_bound


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _emit(args, payload: dict, text: str):
    print(json.dumps(payload, indent=2) if args.json else text)


def _config(args) -> SearchConfig:
    return SearchConfig(dim=args.dim, restarts=args.restarts, max_iters=args.max_iters,
                        seed=args.seed, success_tol=args.tol, init_scale=args.init_scale)


def _int_list(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    doc = dsl.parse(_read(args.doc))
    rep = rep_from_json(_read_json(args.rep))
    report = check(doc.relations, rep, args.tol)
    lines = [f"satisfied: {'yes' if report.satisfied else 'no'}"]
    for rel, r in zip(doc.relations.relations, report.residuals):
        lines.append(f"  {dsl.format_relation(rel)}: residual {r:.3e}")
    if report.flags:
        lines.append("flags: " + ", ".join(report.flags))
    _emit(args, report.to_json(), "\n".join(lines))
    return 0 if report.satisfied else 1


def cmd_unfold(args) -> int:
    doc = dsl.parse(_read(args.doc))
    R = doc.relations
    if args.zero_alpha is not None:
        alpha = ScalarRep.zero(R.generators, args.zero_alpha)
    elif doc.alpha is not None:
        alpha = doc.alpha
    else:
        raise UsageError("no alpha table: add 'alpha' declarations or pass --zero-alpha N")
    U = unfold(R, alpha, args.tol)
    if args.subst:
        mapping, names = {}, []
        for item in args.subst:
            if "=" not in item:
                raise UsageError(f"--subst expects ENTRY=EXPR, got {item!r}")
            key, text = item.split("=", 1)
            e = dsl.parse_expr(text)
            for g in sorted(nc.generators(e)):
                if g not in names:
                    names.append(g)
            mapping[key.strip()] = e
        for key in U.generators:
            if key not in mapping:
                mapping[key] = nc.Gen(key)
                names.append(key)
        out = substitute_entries(U, mapping, names)
    else:
        out = U.relation_set()
    text = dsl.format_document(out)
    _emit(args, {"document": text, "generators": list(out.generators)}, text.rstrip("\n"))
    return 0


def cmd_search(args) -> int:
    doc = dsl.parse(_read(args.doc))
    result = find_representation(doc.relations, _config(args))
    payload = result.to_json()
    text = (f"converged: {'yes' if result.converged else 'no'}\nresidual: {result.residual:.3e}\n"
            f"iterations: {result.iterations}\n" + json.dumps(rep_to_json(result.best)))
    _emit(args, payload, text)
    return 0 if result.converged else 1


def cmd_probe(args) -> int:
    doc = dsl.parse(_read(args.doc))
    witness = probe_norm_bound(doc.relations, args.gen, args.target_norm, _config(args))
    if witness is None:
        _emit(args, {"found": False, "generator": args.gen, "target": args.target_norm},
              f"no witness with norm({args.gen}) >= {args.target_norm}")
        return 1
    report = check(doc.relations, witness, args.tol)
    norm = op_norm(witness.gens[args.gen])
    payload = {"found": True, "generator": args.gen, "target": args.target_norm, "norm": norm,
               "check": report.to_json(), "witness": rep_to_json(witness)}
    _emit(args, payload, f"witness with norm({args.gen}) = {norm:.6g}\n" + json.dumps(rep_to_json(witness)))
    return 0


def cmd_embed(args) -> int:
    text = args.expr if args.expr is not None else _read(args.file)
    p = nc.to_polynomial(dsl.parse_expr(text))
    image = embed(p)
    zero = is_zero_certified(p)
    listing = image.listing()
    payload = {"polynomial": str(p), "zero": zero, "terms": listing}
    _emit(args, payload, "\n".join(listing) if listing else "0")
    ok = zero if args.expect_zero else not zero
    return 0 if ok else 1


def _witnesses(args, R: RelationSet) -> list[RepTuple]:
    reps = [rep_from_json(_read_json(p)) for p in args.rep or []]
    if not reps and args.restarts > 0:
        found = find_representation(R, _config(args))
        reps = [o.rep for o in found.restart_results if o.converged]
    return reps


def cmd_axioms(args) -> int:
    doc = dsl.parse(_read(args.doc))
    R = doc.relations
    report = run_axiom_harness(R, _witnesses(args, R), trials=args.trials, seed=args.seed, tol=args.tol)
    lines = []
    for axiom, results in report.results.items():
        passed = sum(r.passed for r in results)
        flags = sorted({f for r in results for f in r.flags})
        lines.append(f"{axiom}: {passed}/{len(results)} passed" + (f"  flags: {', '.join(flags)}" if flags else ""))
    lines.append("all pass: " + ("yes" if report.passed else "no"))
    _emit(args, report.to_json(), "\n".join(lines))
    return 0 if report.passed else 1


def cmd_pushout(args) -> int:
    obj = _read_json(args.algebra)
    C = FDAlgebra.from_json(obj)
    J = BlockIdeal(frozenset(_int_list(args.j) if args.j is not None else obj.get("J", [])))
    K = BlockIdeal(frozenset(_int_list(args.k) if args.k is not None else obj.get("K", [])))
    sq = pushout_of_quotients(C, J, K)
    square = verify_square(sq, args.samples, args.seed)
    kernel = verify_kernel_image(sq, args.samples, args.seed)
    rng = np.random.default_rng(args.seed)
    lifts = 0
    for _ in range(args.samples):
        a, b = random_compatible_pair(sq, rng)
        c = lift_pair(sq, a, b)
        lifts += sq.alpha(c) == a and sq.beta(c) == b
    passed = all(square.values()) and kernel["passed"] and lifts == args.samples
    payload = {"square": sq.describe(), "verify": square, "kernel_image": kernel,
               "lifts": {"tried": args.samples, "succeeded": lifts}, "passed": passed}
    d = sq.describe()
    text = "\n".join([f"A = C/K = {d['A=C/K']}", f"B = C/J = {d['B=C/J']}", f"X = C/(J+K) = {d['X=C/(J+K)']}",
                      "checks: " + ", ".join(f"{k}={v}" for k, v in square.items()),
                      f"alpha(ker beta) = ker delta: {kernel['passed']}",
                      f"lifted pairs: {lifts}/{args.samples}"])
    _emit(args, payload, text)
    return 0 if passed else 1


def cmd_combine(args) -> int:
    doc = dsl.parse(_read(args.doc))
    R = doc.relations
    if R.blocks or not all(isinstance(r, EqZero) for r in R.relations):
        raise UsageError("combine needs a document of plain equations")
    weights = None
    if args.weights:
        try:
            weights = [float(w) for w in args.weights.split(",")]
        except ValueError:
            raise UsageError(f"bad --weights {args.weights!r}") from None
    g = combine_to_single([r.expr for r in R.relations], weights)
    out = RelationSet(R.generators, (EqZero(g),))
    text = dsl.format_document(out)
    _emit(args, {"document": text}, text.rstrip("\n"))
    return 0


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="starrel", description="Relations on noncommutative *-polynomials and matrix tuples.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=1e-9):
        sp.add_argument("--json", action="store_true", help="print JSON instead of text")
        sp.add_argument("--tol", type=float, default=tol)

    def search_flags(sp, restarts=8):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--dim", type=int, default=2)
        sp.add_argument("--restarts", type=int, default=restarts)
        sp.add_argument("--max-iters", type=int, default=2000)
        sp.add_argument("--init-scale", type=float, default=1.0)

    sp = sub.add_parser("check", help="check a tuple against a relation document")
    sp.add_argument("doc")
    sp.add_argument("rep", help="RepTuple JSON file")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("unfold", help="rewrite over entry generators")
    sp.add_argument("doc")
    sp.add_argument("--zero-alpha", type=int, metavar="N", help="use alpha = 0 of size N")
    sp.add_argument("--subst", action="append", metavar="ENTRY=EXPR", help="rename an entry generator")
    common(sp)
    sp.set_defaults(func=cmd_unfold)

    sp = sub.add_parser("search", help="numerically search for a representation")
    sp.add_argument("doc")
    common(sp, tol=1e-7)
    search_flags(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("probe", help="look for a representation with a large generator norm")
    sp.add_argument("doc")
    sp.add_argument("--gen", required=True)
    sp.add_argument("--target-norm", type=float, required=True)
    common(sp, tol=1e-7)
    search_flags(sp)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("embed", help="image of a *-polynomial in the free group algebra")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("expr", nargs="?")
    src.add_argument("--file")
    sp.add_argument("--expect-zero", action="store_true", help="exit 0 iff the polynomial is zero")
    common(sp)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("axioms", help="run the closure-axiom harness")
    sp.add_argument("doc")
    sp.add_argument("--rep", action="append", help="witness RepTuple JSON (repeatable)")
    sp.add_argument("--trials", type=int, default=5)
    common(sp)
    search_flags(sp, restarts=4)
    sp.set_defaults(func=cmd_axioms)

    sp = sub.add_parser("pushout", help="pushout of two quotients of a block algebra")
    sp.add_argument("algebra", help='JSON like {"blocks": [2, 3], "J": [1], "K": [2]}')
    sp.add_argument("--j", help="comma-separated block indices (1-based)")
    sp.add_argument("--k", help="comma-separated block indices (1-based)")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_pushout)

    sp = sub.add_parser("combine", help="collapse equations into one")
    sp.add_argument("doc")
    sp.add_argument("--weights", help="comma-separated positive weights")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_combine)
    return p


def _error(kind: str, message: str, extra: dict | None = None):
    payload = {"error": kind, "message": message}
    payload.update(extra or {})
    print(json.dumps(payload), file=sys.stderr)


def run(command: str, args: Sequence[str]) -> int:
    return main([command, *args])


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        _error("UsageError", str(exc))
        return 2
    except DslError as exc:
        _error(type(exc).__name__, str(exc), {"line": exc.line, "column": exc.column, "expected": list(exc.expected)})
        return 1
    except (StarRelError, ValueError) as exc:
        _error(type(exc).__name__, str(exc))
        return 1
    except (KeyError, TypeError) as exc:
        _error("MalformedInput", f"malformed input file: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
