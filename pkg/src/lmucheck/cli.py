"""Command-line front end.

Subcommands: `check` runs the full pipeline on a model file and a formula,
`encode` prints the fixed-point encoding of a PCTL formula, `translate`
prints per-state terms, `eval` evaluates a term at a point, and `oracle`
runs the brute-force PCTL checker. Values print as exact rationals; decimal
approximations are opt-in and marked with `~`. Exit codes: 0 success, 1
input error, 2 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import lmu, pctl, terms
from .checking import CheckOutcome, model_check_lmu, model_check_pctl
from .evaluator import (
    EvalError,
    InternalInvariantError,
    TermEvaluator,
    render_inequality,
    render_lin_expr,
)
from .model import ModelError, parse_model
from .oracle import OracleError, SchedulerSpaceError, pctl_oracle, next_prob, until_prob_md
from .parser import ParseError, parse_lmu, parse_pctl, parse_term
from .rationals import RationalParseError, approx_decimal, format_rational, parse_rational
from .translator import TranslationError, translate

_INPUT_ERRORS = (
    ModelError,
    ParseError,
    RationalParseError,
    EvalError,
    OracleError,
    TranslationError,
    OSError,
    ValueError,
)


def _load_model(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


def _report_lines(outcome: CheckOutcome, show_approx: bool) -> list[str]:
    lines = []
    for s, v in outcome.values.items():
        line = f"{s} = {format_rational(v)}"
        if show_approx:
            line += f" (~{approx_decimal(v)})"
        lines.append(line)
    return lines


def _report_json(formula_text: str, outcome: CheckOutcome) -> str:
    doc = {
        "formula": formula_text,
        "results": [
            {
                "state": s,
                "num": str(v.numerator),
                "den": str(v.denominator),
                "approx": approx_decimal(v),
            }
            for s, v in outcome.values.items()
        ],
        "iterations": outcome.iterations,
    }
    return json.dumps(doc)


def _cmd_check(args: argparse.Namespace) -> int:
    m, interp = _load_model(args.model)
    states = (args.state,) if args.state else None
    if states and states[0] not in m.index:
        raise ModelError(f"unknown state {states[0]!r}")
    if args.pctl is not None:
        phi = parse_pctl(args.pctl)
        outcome = model_check_pctl(phi, m, interp, states)
        formula_text = args.pctl
    else:
        phi = parse_lmu(args.lmu)
        outcome = model_check_lmu(phi, m, interp, states)
        formula_text = args.lmu
    if args.cross_check:
        if args.pctl is None:
            raise ModelError("--cross-check needs a PCTL formula")
        verdict = pctl_oracle(phi, m, interp)
        for s, v in outcome.values.items():
            expected = Fraction(1 if verdict[s] else 0)
            if v != expected:
                raise InternalInvariantError(
                    f"cross-check mismatch at {s}: pipeline {format_rational(v)}, "
                    f"oracle {format_rational(expected)}"
                )
    if args.json:
        print(_report_json(formula_text, outcome))
    else:
        for line in _report_lines(outcome, args.approx):
            print(line)
        if args.cross_check:
            print("cross-check: ok")
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    phi = parse_pctl(args.pctl)
    from .encoder import encode_pctl

    print(lmu.render_lmu(encode_pctl(phi)))
    return 0


def _cmd_translate(args: argparse.Namespace) -> int:
    m, interp = _load_model(args.model)
    phi = parse_pctl(args.pctl) if args.pctl is not None else parse_lmu(args.lmu)
    if args.pctl is not None:
        from .encoder import encode_pctl

        formula = encode_pctl(phi)
    else:
        formula = phi
    targets = (args.state,) if args.state else m.states
    for s in targets:
        if s not in m.index:
            raise ModelError(f"unknown state {s!r}")
        term = translate(formula, m, interp, s)
        if len(targets) == 1:
            print(terms.render_term(term))
        else:
            print(f"{s}: {terms.render_term(term)}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    term = parse_term(args.term)
    point: dict[str, Fraction] = {}
    for binding in args.at or []:
        name, eq, value = binding.partition("=")
        if not eq:
            raise EvalError(f"expected name=value, got {binding!r}")
        point[name.strip()] = parse_rational(value)
    evaluator = TermEvaluator()
    result = evaluator.evaluate(term, point)
    print(format_rational(result.value))
    if args.approx:
        print(f"~{approx_decimal(result.value)}")
    if args.show_conditions:
        print(f"expr: {render_lin_expr(result.expr, result.variables)}")
        for ineq in result.conditions:
            print(f"cond: {render_inequality(ineq, result.variables)}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    m, interp = _load_model(args.model)
    phi = parse_pctl(args.pctl)
    verdict = pctl_oracle(phi, m, interp)
    states = (args.state,) if args.state else m.states
    for s in states:
        if s not in m.index:
            raise ModelError(f"unknown state {s!r}")
    if args.json:
        doc = {
            "formula": args.pctl,
            "results": [
                {"state": s, "num": "1" if verdict[s] else "0", "den": "1",
                 "approx": "1" if verdict[s] else "0"}
                for s in states
            ],
            "iterations": 0,
        }
        print(json.dumps(doc))
        return 0
    for s in states:
        print(f"{s} = {1 if verdict[s] else 0}")
    if args.probs:
        if isinstance(phi, (pctl.ProbExists, pctl.ProbForall)):
            mode = "max" if isinstance(phi, pctl.ProbExists) else "min"
            path = phi.path
            if isinstance(path, pctl.Next):
                target = frozenset(
                    s for s, ok in pctl_oracle(path.body, m, interp).items() if ok
                )
                probs = next_prob(m, target, mode)
            else:
                left = frozenset(s for s, ok in pctl_oracle(path.left, m, interp).items() if ok)
                right = frozenset(s for s, ok in pctl_oracle(path.right, m, interp).items() if ok)
                probs = until_prob_md(m, left, right, mode)
            for s in states:
                print(f"prob {s} = {format_rational(probs[s])}")
        else:
            print("prob: formula has no outer probability operator")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lmucheck", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="model-check a formula, exact values per state")
    check.add_argument("--model", required=True, help="model file")
    group = check.add_mutually_exclusive_group(required=True)
    group.add_argument("--lmu", help="fixed-point formula")
    group.add_argument("--pctl", help="PCTL state formula (boolean models)")
    check.add_argument("--state", help="restrict to one state")
    check.add_argument("--json", action="store_true", help="structured output")
    check.add_argument("--approx", action="store_true", help="include labelled decimals")
    check.add_argument(
        "--cross-check", action="store_true", help="verify PCTL results against the oracle"
    )
    check.set_defaults(func=_cmd_check)

    encode = sub.add_parser("encode", help="print the fixed-point encoding of a PCTL formula")
    encode.add_argument("--pctl", required=True)
    encode.set_defaults(func=_cmd_encode)

    tr = sub.add_parser("translate", help="print the per-state term for a formula and model")
    tr.add_argument("--model", required=True)
    trg = tr.add_mutually_exclusive_group(required=True)
    trg.add_argument("--lmu")
    trg.add_argument("--pctl")
    tr.add_argument("--state", help="translate at this state only")
    tr.set_defaults(func=_cmd_translate)

    ev = sub.add_parser("eval", help="evaluate a term at a point")
    ev.add_argument("--term", required=True)
    ev.add_argument("--at", action="append", metavar="NAME=RATIONAL")
    ev.add_argument("--approx", action="store_true")
    ev.add_argument(
        "--show-conditions", action="store_true", help="print the conditioned expression"
    )
    ev.set_defaults(func=_cmd_eval)

    orc = sub.add_parser("oracle", help="run the brute-force PCTL checker")
    orc.add_argument("--model", required=True)
    orc.add_argument("--pctl", required=True)
    orc.add_argument("--state")
    orc.add_argument("--json", action="store_true")
    orc.add_argument(
        "--probs", action="store_true", help="also print the extremal probabilities"
    )
    orc.set_defaults(func=_cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except SchedulerSpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
