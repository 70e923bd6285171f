"""Command-line front end.

Every command prints one JSON report to stdout. Exit codes: 0 holds,
1 violated, 2 internal error or chain inconsistency, 64 bad flags,
65 bad input data (unparsable expression, invalid matrix or state file,
function evaluated outside its domain).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, _defaults
from .monotone import (
    chain_consistency,
    check_hansen_pedersen,
    check_n_concave,
    check_n_monotone,
    frechet_derivative,
)
from .psineq import PSCheckConfig, TraceConditionError, check_ps, counterexample_search, reproduce_fixtures, trace_condition_inf
from .scalarfn import DomainError, DomainInterval, ParseError, parse
from .symmat import ConvergenceError, State, load_matrix, load_state, matrix_to_json
from .verdict import DOMAIN_ERROR, HOLDS, VIOLATED, _jsonable, resolve_seed

EX_OK, EX_VIOLATED, EX_ERROR, EX_USAGE, EX_DATAERR = 0, 1, 2, 64, 65
SCHEMA = 1


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _domain(text):
    try:
        return DomainInterval.from_text(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _common(p, randomized=True, trials=1000):
    if randomized:
        p.add_argument("--trials", type=_positive_int, default=trials)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=_positive_int, default=1)
        p.add_argument("--strict", action="store_true", help="require --seed")
    p.add_argument("--psd-eps", type=float, default=_defaults.PSD_EPS_REL)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matmono", description="Matrix monotonicity and trace inequality checks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    for name in ("check-monotone", "check-concave", "check-hp"):
        p = sub.add_parser(name)
        p.add_argument("--fn", required=True)
        p.add_argument("--order", type=_positive_int, required=True)
        p.add_argument("--domain", type=_domain, default=DomainInterval())
        _common(p)

    p = sub.add_parser("chain")
    p.add_argument("--fn", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--domain", type=_domain, default=DomainInterval())
    _common(p)

    p = sub.add_parser("check-ps")
    p.add_argument("--fn", required=True, help="the function f; g = t/f(t)")
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--state", default="trace", help="'trace' or a state JSON file")
    p.add_argument("--ordered-only", action="store_true")
    p.add_argument("--fixtures", action="store_true")
    p.add_argument("--tol", type=float, default=_defaults.SCALAR_TOL)
    _common(p)

    p = sub.add_parser("trace-condition")
    p.add_argument("--g", required=True)
    p.add_argument("--range", type=_domain, required=True)
    p.add_argument("--grid", type=int, default=128)

    p = sub.add_parser("find-counterexample")
    p.add_argument("--g", required=True)
    p.add_argument("--dim", type=int, required=True)
    _common(p, trials=100_000)

    p = sub.add_parser("frechet")
    p.add_argument("--fn", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--direction", required=True)

    sub.add_parser("fixtures")
    return parser


def _seed(args):
    if args.seed is None and args.strict:
        raise UsageError("--strict requires --seed")
    return resolve_seed(args.seed)


def _fn(text):
    try:
        return parse(text)
    except ParseError as exc:
        raise DataError(f"cannot parse {text!r}: {exc}")


def _verdict_exit(verdict):
    return {HOLDS: EX_OK, VIOLATED: EX_VIOLATED, DOMAIN_ERROR: EX_DATAERR}[verdict.status]


def run(args):
    """Dispatch a parsed command. Returns ``(config, result, exit_code)``."""
    cmd = args.command
    if cmd in ("check-monotone", "check-concave", "check-hp"):
        seed = _seed(args)
        fn = _fn(args.fn)
        config = dict(fn=args.fn, order=args.order, domain=str(args.domain), trials=args.trials,
                      seed=seed, psd_eps=args.psd_eps)
        if cmd == "check-monotone":
            v = check_n_monotone(fn, args.order, args.domain, args.trials, seed, args.jobs, args.psd_eps)
        elif cmd == "check-concave":
            v = check_n_concave(fn, args.order, args.domain, args.trials, seed, args.jobs, args.psd_eps)
        else:
            v = check_hansen_pedersen(fn, args.order, args.trials, seed, args.jobs, args.domain, args.psd_eps)
        return config, {"verdict": v.to_json()}, _verdict_exit(v)

    if cmd == "chain":
        if args.order < 2:
            raise UsageError("chain needs --order >= 2")
        seed = _seed(args)
        report = chain_consistency(_fn(args.fn), args.order, args.trials, seed, args.jobs,
                                   args.domain, args.psd_eps)
        config = dict(fn=args.fn, order=args.order, domain=str(args.domain), trials=args.trials,
                      seed=seed, psd_eps=args.psd_eps)
        statuses = [leg.status for leg in report.legs.values()]
        if report.inconsistencies:
            code = EX_ERROR
        elif DOMAIN_ERROR in statuses:
            code = EX_DATAERR
        elif VIOLATED in statuses:
            code = EX_VIOLATED
        else:
            code = EX_OK
        return config, {"chain": report.to_json()}, code

    if cmd == "check-ps":
        seed = _seed(args)
        if args.state == "trace":
            state = State.canonical()
        else:
            try:
                state = load_state(args.state)
            except (OSError, ValueError) as exc:
                raise DataError(f"invalid state file: {exc}")
        try:
            cfg = PSCheckConfig(_fn(args.fn), args.dim, args.trials, state, args.ordered_only, seed,
                                tol=args.tol, fixtures=args.fixtures, jobs=args.jobs)
        except ValueError as exc:
            raise DataError(str(exc))
        v = check_ps(cfg)
        config = dict(fn=args.fn, dim=args.dim, trials=args.trials, seed=seed, state=state.to_json(),
                      ordered_only=args.ordered_only, fixtures=args.fixtures, spectrum=list(cfg.spectrum),
                      tol=args.tol)
        return config, {"verdict": v.to_json()}, _verdict_exit(v)

    if cmd == "trace-condition":
        if args.grid < 2:
            raise UsageError("--grid must be >= 2")
        try:
            est = trace_condition_inf(_fn(args.g), args.range, args.grid)
        except TraceConditionError as exc:
            raise DataError(str(exc))
        config = dict(g=args.g, range=str(args.range), grid=args.grid)
        result = {"inf": {"value": est.value, "argmin_pair": list(est.argmin_pair),
                          "grid_size": est.grid_size}}
        return config, result, EX_OK

    if cmd == "find-counterexample":
        if args.dim < 2:
            raise UsageError("--dim must be >= 2")
        seed = _seed(args)
        v = counterexample_search(_fn(args.g), args.dim, args.trials, seed, args.jobs, psd_eps=args.psd_eps)
        config = dict(g=args.g, dim=args.dim, trials=args.trials, seed=seed, psd_eps=args.psd_eps)
        return config, {"verdict": v.to_json()}, _verdict_exit(v)

    if cmd == "frechet":
        try:
            A = load_matrix(args.matrix)
            C = load_matrix(args.direction)
            D = frechet_derivative(_fn(args.fn), A, C)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc))
        config = dict(fn=args.fn, matrix=args.matrix, direction=args.direction)
        return config, {"derivative": matrix_to_json(D)}, EX_OK

    if cmd == "fixtures":
        results = reproduce_fixtures()
        code = EX_OK if all(r.consistent is not False for r in results) else EX_VIOLATED
        return {}, {"fixtures": [r.to_json() for r in results]}, code

    raise UsageError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"matmono: {exc}", file=sys.stderr)
        return EX_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        with np.errstate(all="ignore"):
            config, result, code = run(args)
    except UsageError as exc:
        print(f"matmono: {exc}", file=sys.stderr)
        return EX_USAGE
    except (DataError, DomainError) as exc:
        print(f"matmono: {exc}", file=sys.stderr)
        return EX_DATAERR
    except ConvergenceError as exc:
        print(f"matmono: {exc}", file=sys.stderr)
        return EX_ERROR
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "version": __version__,
        "config": _jsonable(config),
        **result,
        "exit_code": code,
        "timing": {"wall_seconds": time.perf_counter() - started},
    }
    print(json.dumps(report, indent=2))
    if code == EX_DATAERR:
        print("matmono: function evaluated outside its domain; see verdict.error", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
