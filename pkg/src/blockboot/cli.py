"""Command-line interface: ``blockboot estimate | theory | optimal-block | simulate``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from . import __version__
from ._exceptions import BlockBootError, NumericalIntegrityError
from .asymptotics import optimal_block, plugin_optimal_block, summarize
from .estimators import BlockSpec, Method, estimate
from .series import Ar1Model, read_series
from .simulation import ExperimentConfig, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _cmd_estimate(args) -> int:
    series = read_series(args.series)
    method = Method.parse(args.method)
    print(_fmt(estimate(series, method, BlockSpec(args.block))))
    return EXIT_OK


def _cmd_theory(args) -> int:
    summary = summarize(Ar1Model(args.phi, args.sigma), Method.parse(args.method), args.n, args.block)
    for key, value in summary.as_dict().items():
        print(f"{key}: {_fmt(value)}")
    return EXIT_OK


def _cmd_optimal_block(args) -> int:
    method = Method.parse(args.method)
    if args.series is not None:
        if any(v is not None for v in (args.phi, args.n)):
            raise UsageError("optimal-block: give either --series or --phi/--sigma/--n, not both")
        print(_fmt(plugin_optimal_block(read_series(args.series), method)))
        return EXIT_OK
    if args.phi is None or args.n is None:
        raise UsageError("optimal-block: need --series FILE or --phi P --n N")
    print(_fmt(optimal_block(Ar1Model(args.phi, args.sigma), method, args.n)))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    report = run(config, workers=args.workers)
    path = report.write(args.out)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockboot", description="Block bootstrap variance estimation for stationary series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("estimate", help="closed-form bootstrap estimate of n Var(mean)")
    p.add_argument("--series", required=True, help="text file, one value per line")
    p.add_argument("--method", required=True, help="sb, nbb, mbb, cbb, tbb or tbb:rectangular")
    p.add_argument("--block", required=True, type=float, help="block length (expected length for sb)")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("theory", help="asymptotic variance, bias and MSE for an AR(1) model")
    p.add_argument("--phi", required=True, type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--block", required=True, type=float)
    p.add_argument("--method", required=True)
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("optimal-block", help="MSE-optimal block length (plug-in or AR(1) oracle)")
    p.add_argument("--series")
    p.add_argument("--phi", type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int)
    p.add_argument("--method", required=True)
    p.set_defaults(func=_cmd_optimal_block)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None, help="overrides BLOCKBOOT_WORKERS")
    p.set_defaults(func=_cmd_simulate)
    return parser


def _validation_line(exc: ValidationError) -> str:
    err = exc.errors()[0]
    loc = ".".join(str(part) for part in err["loc"]) or "config"
    more = f" (+{exc.error_count() - 1} more)" if exc.error_count() > 1 else ""
    return f"{loc}: {err['msg']}{more}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"blockboot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalIntegrityError as exc:
        print(f"blockboot: numerical integrity error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"blockboot: invalid config: {_validation_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, BlockBootError) as exc:
        print(f"blockboot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
