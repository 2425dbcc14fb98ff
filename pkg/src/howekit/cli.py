"""Command-line front end. Every command builds a JSON report; ``--json``
prints it as is, otherwise a short text rendering is printed.

Exit status: 0 when everything holds, 1 on a definite failure, 2 when
the only shortfall is an inconclusive verdict, 3 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Sequence

from .bisim import BisimChecker, Relation, SubstPool, check_relation, replay
from .evaluate import Evaluator, HoweEvaluator
from .howe import congruence_sweep, default_howe_suite
from .instances import _INSTANCES, load_instance
from .rules import DynamicSignature, rigidify, validate_signature
from .surface import ParseError, parse_context, parse_signature, parse_term, show_signature, show_term
from .syntax import EMPTY, StructuralError, enumerate_terms

OK, FAILED, INCONCLUSIVE, USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load(spec: str) -> DynamicSignature:
    path = Path(spec)
    if path.exists():
        return parse_signature(path.read_text(), path.stem)
    if spec in _INSTANCES:
        return load_instance(spec)
    raise UsageError(f"no such signature file or built-in instance: {spec}")


def _state_sort(dsig: DynamicSignature, given: str | None) -> str:
    if given:
        if given not in dsig.binding.sorts:
            raise UsageError(f"unknown sort {given!r}")
        return given
    if dsig.labels:
        return dsig.labels[0].source_sort
    return "p"


def _pool(dsig: DynamicSignature, args) -> SubstPool:
    extras = [parse_term(dsig, x, None) for x in getattr(args, "extra", None) or ()]
    return SubstPool.build(dsig, args.pool_size, args.values_only, extras)


def _status_code(status: str) -> int:
    return {"holds": OK, "fails": FAILED, "inconclusive": INCONCLUSIVE}[status]


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    rep = validate_signature(dsig)
    report = {
        "signature": dsig.name,
        "ok": rep.ok,
        "rules": [r.name for r in dsig.all_rules],
        "howe_rules": [r.name for r in dsig.howe_rules],
        "diagnostics": [{"rule": d.rule, "clause": d.clause, "message": d.message} for d in rep.diagnostics],
        "table": {f"{h}/{lab}": n for (h, lab), n in sorted(rep.table.items())},
    }
    return report, OK if rep.ok else FAILED


def cmd_rigidify(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    if not dsig.howe_rules:
        raise UsageError(f"{args.file} has no howe rules to rigidify")
    res = rigidify(dsig.howe_rules, dsig.binding, f"{dsig.name}-rigid")
    out_sig = res.signature.replace(defines=dsig.defines)
    out = Path(args.output)
    out.write_text(show_signature(out_sig))
    mapping_path = Path(args.mapping) if args.mapping else out.with_suffix(".json")
    mapping_path.write_text(json.dumps(res.mapping_json(), indent=2) + "\n")
    check = validate_signature(out_sig)
    report = {
        "output": str(out),
        "mapping_file": str(mapping_path),
        "mapping": res.mapping,
        "warnings": res.warnings,
        "valid": check.ok,
        "diagnostics": [str(d) for d in check.diagnostics],
    }
    return report, OK if check.ok else FAILED


def cmd_eval(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    sort = _state_sort(dsig, args.sort)
    t = parse_term(dsig, args.term, sort)
    report: dict = {"term": show_term(t, dsig, sort), "fuel": args.fuel}
    if not dsig.labels and dsig.howe_rules:
        res = HoweEvaluator(dsig.binding, dsig.howe_rules).evaluate(t, args.fuel)
        report["label"] = "==>"
        report["targets"] = [show_term(u, dsig) for u in res.targets]
    else:
        label = dsig.label(args.label) if args.label else dsig.labels[0]
        ev = Evaluator(dsig)
        res = ev.transitions(t, label, args.fuel)
        report["label"] = label.name
        report["targets"] = [show_term(u, dsig, label.target_sort) for u in res.targets]
        if args.trace:
            report["derivations"] = [d.to_json(dsig) for d in ev.derivations(t, label, args.fuel)]
    report["complete"] = res.complete
    report["fuel_exhausted"] = res.fuel_exhausted
    return report, OK if res.complete else INCONCLUSIVE


def cmd_bisim(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    sort = _state_sort(dsig, args.sort)
    t1, t2 = parse_term(dsig, args.left, sort), parse_term(dsig, args.right, sort)
    pool = _pool(dsig, args)
    checker = BisimChecker(dsig, args.fuel, pool)
    start = time.perf_counter()
    v = checker.check(t1, t2, args.depth)
    report = {
        "left": show_term(t1, dsig, sort),
        "right": show_term(t2, dsig, sort),
        "depth": args.depth,
        "fuel": args.fuel,
        "pool": pool.describe(),
        **v.to_json(dsig),
        "replayed": replay(checker, v),
        "seconds": round(time.perf_counter() - start, 3),
    }
    return report, _status_code(v.status)


def _read_relation(dsig: DynamicSignature, path: str, sort: str) -> Relation:
    R = Relation()
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if text.count("~") != 1:
            raise ParseError("expected 'TERM ~ TERM'", n, 1)
        left, right = text.split("~")
        try:
            R.add(parse_term(dsig, left, sort), parse_term(dsig, right, sort), sort)
        except ParseError as e:
            raise ParseError(e.message, n, e.column) from None
    return R


def cmd_check_rel(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    sort = _state_sort(dsig, args.sort)
    R = _read_relation(dsig, args.relation, sort)
    pool = _pool(dsig, args)
    rep = check_relation(dsig, R, args.fuel, pool, symmetric=not args.one_way)
    report = {"fuel": args.fuel, "pool": pool.describe(), "symmetric": not args.one_way, **rep.to_json()}
    return report, _status_code(rep.status)


def cmd_howe(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    report = default_howe_suite(
        dsig,
        size=args.size,
        ctx_bound=args.ctx_bound,
        depth=args.depth,
        fuel=args.fuel,
        pool_size=args.pool_size,
        sim_pool_size=args.sim_pool_size,
        values_only=args.values_only,
        checks=args.checks,
        samples=args.samples,
        seed=args.seed,
    )
    failed = any(not c["ok"] for c in report["checks"])
    return report, FAILED if failed else OK


def cmd_congruence(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    pool = _pool(dsig, args)
    rep = congruence_sweep(
        dsig,
        depth=args.depth,
        fuel=args.fuel,
        pool=pool,
        n_samples=args.samples,
        seed=args.seed,
        depth_after=args.depth_after,
        term_size=args.term_size,
        context_size=args.context_size,
        sort=args.sort,
    )
    report = rep.to_json()
    if rep.counterexamples:
        return report, FAILED
    return report, INCONCLUSIVE if rep.inconclusive else OK


def cmd_enumerate(args) -> tuple[dict, int]:
    dsig = _load(args.file)
    sort = _state_sort(dsig, args.sort)
    ctx = parse_context(args.ctx, dsig) if args.ctx else EMPTY
    terms = enumerate_terms(dsig.binding, sort, ctx, args.size)
    report = {
        "sort": sort,
        "ctx": str(ctx),
        "size": args.size,
        "count": len(terms),
        "terms": [show_term(t, dsig, sort) for t in terms],
    }
    return report, OK


# ---------------------------------------------------------------------------
# Text rendering


def render(command: str, report: dict) -> str:
    lines: list[str] = []
    match command:
        case "validate":
            lines.append(f"{report['signature']}: {'ok' if report['ok'] else 'invalid'}")
            lines += [f"  {d['rule']}: {d['message']} ({d['clause']})" for d in report["diagnostics"]]
            lines += [f"  {k}: {n} rule(s)" for k, n in report["table"].items()]
        case "rigidify":
            lines.append(f"wrote {report['output']} and {report['mapping_file']}")
            lines += [f"  warning: {w}" for w in report["warnings"]]
            lines += [f"  {d}" for d in report["diagnostics"]]
        case "eval":
            flag = "complete" if report["complete"] else "fuel exhausted"
            arrow = "==>" if report["label"] == "==>" else f"={report['label']}=>"
            lines.append(f"{report['term']} {arrow} ({flag}, fuel {report['fuel']})")
            lines += [f"  {u}" for u in report["targets"]] or ["  (no targets)"]
        case "bisim":
            lines.append(f"{report['left']} ~ {report['right']}: {report['status']}")
            if report.get("witness"):
                lines.append(json.dumps(report["witness"], indent=2))
        case "check-rel":
            lines.append(f"{report['pairs_checked']} pair(s): {report['status']}")
            for v in report["violations"] + report["inconclusive"]:
                lines.append(f"  {v['left']} ~ {v['right']}: {v['side']} move {v['label']} to {v['target']}")
        case "howe":
            c = report["closure"]
            lines.append(
                f"closure: {c['size']} pairs over {c['universe_size']} terms, {c['iterations']} iterations"
            )
            for chk in report["checks"]:
                extra = f", {chk['inconclusive']} inconclusive" if chk["inconclusive"] else ""
                lines.append(f"  {chk['check']}: {'ok' if chk['ok'] else 'FAILED'} ({chk['checked']} checked{extra})")
        case "congruence":
            lines.append(
                f"{report['samples']} samples: {report['holds']} hold, {report['inconclusive']} inconclusive, "
                f"{len(report['counterexamples'])} counterexamples"
            )
            for cx in report["counterexamples"]:
                lines.append(f"  {cx['t1']} vs {cx['t2']} in {cx['context']} at {cx['hole']}")
        case "enumerate":
            lines += report["terms"]
            lines.append(f"({report['count']} terms)")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Argument parsing


def _pool_args(p: argparse.ArgumentParser, size: int = 3) -> None:
    p.add_argument("--pool-size", type=int, default=size, help="largest closed term in the substitution pool")
    p.add_argument("--values-only", action="store_true", help="fill value slots with values only")
    p.add_argument("--extra", action="append", metavar="TERM", help="add a closed term to the pool")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="howekit", description=__doc__.split("\n")[0])
    parser.add_argument("--json", action="store_true", help="print the JSON report")
    parser.add_argument("--report", metavar="PATH", help="also write the JSON report to PATH")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a signature and check its rule format")
    p.add_argument("file")

    p = sub.add_parser("rigidify", help="compile Howe-format rules to rigid rules")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--mapping", help="where to write the rule mapping (default OUTPUT with .json)")

    p = sub.add_parser("eval", help="bounded derivation search")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("--label")
    p.add_argument("--fuel", type=int, default=8)
    p.add_argument("--sort")
    p.add_argument("--trace", action="store_true", help="include derivation trees")

    p = sub.add_parser("bisim", help="bounded bisimilarity of two closed terms")
    p.add_argument("file")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--fuel", type=int, default=8)
    p.add_argument("--sort")
    _pool_args(p)

    p = sub.add_parser("check-rel", help="check that a finite relation is a bisimulation")
    p.add_argument("file")
    p.add_argument("relation", help="file with one 'TERM ~ TERM' pair per line")
    p.add_argument("--fuel", type=int, default=8)
    p.add_argument("--sort")
    p.add_argument("--one-way", action="store_true", help="check simulation only")
    _pool_args(p)

    p = sub.add_parser("howe", help="Howe closure of bounded bisimilarity and its checks")
    p.add_argument("file")
    p.add_argument("--size", type=int, default=5)
    p.add_argument("--ctx-bound", type=int, default=2)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--fuel", type=int, default=8)
    p.add_argument("--pool-size", type=int, default=3)
    p.add_argument("--sim-pool-size", type=int, default=4)
    p.add_argument("--values-only", action="store_true")
    p.add_argument("--checks", choices=["all", "basic"], default="all")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("congruence", help="sampled congruence test of bounded bisimilarity")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--depth-after", type=int)
    p.add_argument("--fuel", type=int, default=8)
    p.add_argument("--term-size", type=int, default=5)
    p.add_argument("--context-size", type=int, default=5)
    p.add_argument("--sort")
    _pool_args(p)

    p = sub.add_parser("enumerate", help="list terms of a sort up to a size")
    p.add_argument("file")
    p.add_argument("--sort")
    p.add_argument("--ctx", help="context such as '2' or '1 p + 1 v'")
    p.add_argument("--size", type=int, default=4)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "rigidify": cmd_rigidify,
    "eval": cmd_eval,
    "bisim": cmd_bisim,
    "check-rel": cmd_check_rel,
    "howe": cmd_howe,
    "congruence": cmd_congruence,
    "enumerate": cmd_enumerate,
}


def _parse(argv: list[str]) -> argparse.Namespace | int:
    try:
        return build_parser().parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else USAGE


def _execute(args: argparse.Namespace, argv: list[str]) -> tuple[dict, int]:
    try:
        body, code = COMMANDS[args.command](args)
    except ParseError as e:
        body = {"error": "parse", "line": e.line, "column": e.column, "message": e.message}
        code = USAGE
    except (UsageError, StructuralError, KeyError, OSError) as e:
        body = {"error": "usage", "message": str(e).strip("'\"")}
        code = USAGE
    return {"command": argv, "exit": code, **body}, code


def run(argv: Sequence[str] | None = None) -> tuple[dict, int]:
    """Run a command line and return its report and exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parse(argv)
    if isinstance(args, int):
        return {"command": argv, "exit": args, "error": "usage", "message": "bad arguments"}, args
    return _execute(args, argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parse(argv)
    if isinstance(args, int):
        return args
    report, code = _execute(args, argv)
    if "error" in report:
        where = f"{report['line']}:{report['column']}: " if report["error"] == "parse" else ""
        print(f"error: {where}{report['message']}", file=sys.stderr)
    elif args.json:
        print(json.dumps(report, indent=2))
    else:
        print(render(args.command, report))
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
