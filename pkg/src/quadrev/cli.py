"""Command-line front door.

Exit codes: 0 ok, 1 oracle (or envelope) failure, 2 parse or invalid input,
3 precondition failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bounds import TheoremId, evaluate
from .documents import (
    FamilyDocument,
    IntegralDocument,
    ReportDocument,
    analyze,
    digest,
    integral,
    jsonable,
    oracle_family,
    oracle_integral,
    oracle_report,
    parse_document,
    report_record,
)
from .errors import ConsistencyError, InvalidInputError, NoEqualityFamily, PreconditionError
from .witnesses import (
    TARGETS,
    SearchConfig,
    canonical_config,
    equality_family,
    equality_params,
    maximize_defect_ratio,
)

EXIT_OK, EXIT_ORACLE, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def render_table(report: ReportDocument) -> str:
    lines = [f"{report.command}  (version {report.version}, input {report.input_digest[:12]})"]
    if report.command == "oracle":
        for c in report.records:
            mark = "PASS" if c["passed"] else "FAIL"
            lines.append(f"  {mark}  {c['name']:<50} {_fmt(c['discrepancy']):>14} <= {_fmt(c['tolerance'])}"
                         + (f"  [{c['detail']}]" if c["detail"] and not c["passed"] else ""))
        lines.append(f"overall: {'PASS' if report.summary['passed'] else 'FAIL'}")
        return "\n".join(lines) + "\n"
    head = f"  {'theorem':<18} {'league':<9} {'lhs':>16} {'rhs':>16} {'slack':>14} {'eq.res':>10}  note"
    lines.append(head)
    for r in report.records:
        if r.get("applicable", True) is False:
            lines.append(f"  {r['theorem_id']:<18} {r['league']:<9} {'n/a':>16} {'':>16} {'':>14} {'':>10}  {r['reason']}")
            continue
        note = "equality" if r.get("equality") else ""
        lines.append(f"  {r['theorem_id']:<18} {r['league']:<9} {_fmt(r['lhs']):>16} {_fmt(r['rhs']):>16} "
                     f"{_fmt(r['slack']):>14} {_fmt(r['equality_residual_max']):>10}  {note}")
    for key in sorted(report.summary):
        value = report.summary[key]
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        lines.append(f"{key}: {_fmt(value)}")
    return "\n".join(lines) + "\n"


def _emit(report: ReportDocument, fmt: str) -> None:
    text = report.to_json() if fmt == "json" else render_table(report)
    sys.stdout.write(text)


def cmd_analyze(args) -> int:
    doc = parse_document(_read(args.input))
    if not isinstance(doc, FamilyDocument):
        raise InvalidInputError("kind: analyze expects a family document (use 'integral')")
    _emit(analyze(doc), args.format)
    return EXIT_OK


def cmd_integral(args) -> int:
    doc = parse_document(_read(args.input))
    if not isinstance(doc, IntegralDocument):
        raise InvalidInputError("kind: integral expects an integral document")
    _emit(integral(doc), args.format)
    return EXIT_OK


def cmd_oracle(args) -> int:
    doc = parse_document(_read(args.input))
    if isinstance(doc, IntegralDocument):
        result = oracle_integral(doc, args.tolerance if args.tolerance is not None else 1e-12)
    else:
        result = oracle_family(doc, args.tolerance if args.tolerance is not None else 1e-10)
    _emit(oracle_report(doc, result), args.format)
    return EXIT_OK if result.passed else EXIT_ORACLE


def _theorem(name: str) -> TheoremId:
    try:
        return TheoremId(name)
    except ValueError:
        raise InvalidInputError(f"unknown theorem id {name!r}") from None


def cmd_sharpness(args) -> int:
    tid = _theorem(args.theorem)
    config = {
        "theorem": tid.value, "seed": args.seed, "restarts": args.restarts,
        "steps": args.steps, "n": args.n, "d": args.d, "p": args.p,
    }
    dig = digest(json.dumps(config, sort_keys=True))
    if tid not in TARGETS:
        summary = {"config": config, "target": None, "informational": True,
                   "message": "no sharp target stated", "within_envelope": True}
        _emit(ReportDocument("sharpness", dig, summary, []), args.format)
        return EXIT_OK
    cfg = SearchConfig(seed=args.seed, restarts=args.restarts, steps=args.steps, n=args.n,
                       d=args.d, workers=args.workers)
    canon = canonical_config(tid, args.p)
    found = maximize_defect_ratio(tid, cfg, args.p)
    tolerance = args.tolerance if args.tolerance is not None else 1e-12
    target = canon.target_constant
    canon_ok = canon.residual <= tolerance
    upper_ok = found.extracted_constant <= target + 1e-9
    lower_ok = found.extracted_constant >= 0.95 * target if args.n == 2 else None
    ok = bool(canon_ok and upper_ok and lower_ok is not False)
    summary = {
        "config": config,
        "target": target,
        "canonical": {"extracted": canon.extracted_constant, "residual": canon.residual,
                      "family": jsonable(canon.family.vectors), "ok": canon_ok},
        "search": {"best": found.extracted_constant, "restart": found.restart,
                   "evaluations": found.evaluations, "family": jsonable(found.family.vectors),
                   "below_target": upper_ok, "reaches_95_percent": lower_ok},
        "informational": args.n != 2,
        "within_envelope": ok,
    }
    _emit(ReportDocument("sharpness", dig, jsonable(summary), []), args.format)
    return EXIT_OK if ok else EXIT_ORACLE


def _param_pairs(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidInputError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            raise InvalidInputError(f"--param {key}: cannot parse value {value!r}") from None
    return out


def cmd_witness(args) -> int:
    tid = _theorem(args.theorem)
    params = _param_pairs(args.param)
    if args.n is not None:
        params["n"] = args.n
    fam = equality_family(tid, params)
    rep = evaluate(tid, fam, **equality_params(tid, params, fam))
    summary = {"theorem": tid.value, "params": jsonable(params),
               "family": jsonable(fam.vectors), "equality": rep.at_equality}
    dig = digest(json.dumps({"theorem": tid.value, "params": jsonable(params)}, sort_keys=True))
    _emit(ReportDocument("witness", dig, summary, [report_record(rep)]), args.format)
    return EXIT_OK if rep.at_equality else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the comparison tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=50)

    parser = argparse.ArgumentParser(prog="quadrev", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("analyze", cmd_analyze, "detect hypotheses and rank every applicable bound"),
        ("oracle", cmd_oracle, "run the independent cross-checks"),
        ("integral", cmd_integral, "evaluate the weighted integral band bounds"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--input", required=True, metavar="PATH")
        p.set_defaults(func=fn)

    p = sub.add_parser("sharpness", parents=[common], help="confirm a best-possible constant")
    p.add_argument("theorem", nargs="?", default=None)
    p.add_argument("--theorem", dest="theorem_opt", default=None)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--p", type=float, default=2.0, help="Holder exponent")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("witness", parents=[common], help="build and certify an equality family")
    p.add_argument("theorem", nargs="?", default=None)
    p.add_argument("--theorem", dest="theorem_opt", default=None)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "theorem_opt"):
        args.theorem = args.theorem_opt or args.theorem
        if args.theorem is None:
            parser.error(f"{args.command}: a theorem id is required")
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, NoEqualityFamily) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConsistencyError as exc:
        print(f"consistency check failed: {exc}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
