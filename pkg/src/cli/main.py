"""
Command-line entry point.

Exit codes: 0 on success, 2 on usage, configuration or data errors,
3 on internal errors.
"""

import argparse
import logging
import sys
from typing import List, Optional

import yaml
from pydantic import ValidationError

from core.config import get_settings
from core.errors import StaleboostError
from core.log_config import configure_logging
from . import commands


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run file (a run's manifest.yaml also works)")
    parser.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="Override a config value")
    parser.add_argument("--data", help="Training data: LIBSVM path or synthetic:lowdiv / synthetic:highdiv")
    parser.add_argument("--test", help="Test data, same forms as --data")
    parser.add_argument("--n-trees", dest="n_trees", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--step", type=float)
    parser.add_argument("--rate", type=float)
    parser.add_argument("--mode", choices=["serial", "virtual", "threads"])
    parser.add_argument("--output", help="Output directory (default: STALEBOOST_OUTPUT_DIR)")


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scale", type=float, help="lowdiv frequency scale")
    parser.add_argument("--n-samples", dest="n_samples", type=int, help="highdiv sample count")
    parser.add_argument("--synthetic-seed", dest="synthetic_seed", type=int)
    parser.add_argument("--n-features", dest="n_features", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="staleboost",
        description="Stochastic gradient boosting with an asynchronous parameter server.",
    )
    parser.add_argument("--log-level", dest="log_level", help="Override STALEBOOST_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Train a forest")
    _add_run_options(train)
    train.set_defaults(handler=commands.cmd_train)

    evaluate = sub.add_parser("eval", help="Evaluate a forest on a dataset")
    evaluate.add_argument("forest", help="Forest file")
    evaluate.add_argument("data", help="LIBSVM path or synthetic:<name>")
    _add_data_options(evaluate)
    evaluate.set_defaults(handler=commands.cmd_eval)

    stats = sub.add_parser("stats", help="Dataset and sampling-diversity statistics")
    stats.add_argument("data", help="LIBSVM path or synthetic:<name>")
    stats.add_argument("--rate", type=float, default=1.0)
    stats.add_argument("--trials", type=int, default=1000)
    stats.add_argument("--seed", type=int, default=0)
    stats.add_argument("--csv", help="Also write the report as a one-row CSV")
    _add_data_options(stats)
    stats.set_defaults(handler=commands.cmd_stats)

    theory = sub.add_parser("theory", help="Step length, iteration bound and contraction report")
    for name in commands.CONSTANT_FIELDS:
        theory.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    theory.add_argument("--epsilon", type=float, default=0.1)
    theory.add_argument("--theta", type=float, default=0.5)
    theory.add_argument("--d0", type=float, default=1.0, help="Initial squared distance to the optimum")
    theory.add_argument("--log-numerator", dest="log_numerator", type=float,
                        help="L in log(L*D0/eps); defaults to lambda")
    theory.add_argument("--v", type=float, help="Step length for the contraction report (default: computed)")
    theory.add_argument("--t-build", dest="t_build", type=float)
    theory.add_argument("--t-comm", dest="t_comm", type=float, help="Communication plus target time")
    theory.add_argument("--estimate-from", dest="estimate_from", help="Run directory to estimate constants from")
    theory.add_argument("--trials", type=int, default=100)
    theory.add_argument("--seed", type=int, default=0)
    theory.add_argument("--sweep-tau", dest="sweep_tau", metavar="A:B", help="CSV with one row per tau in A..B")
    theory.add_argument("--sweep-rate", dest="sweep_rate", type=_float_list, metavar="R1,R2,...")
    theory.add_argument("--data", help="Dataset for --sweep-rate")
    theory.add_argument("--csv", help="Write the report or sweep to this CSV file")
    _add_data_options(theory)
    theory.set_defaults(handler=commands.cmd_theory)

    sweep = sub.add_parser("sweep", help="Updates-to-threshold over worker counts or rates")
    _add_run_options(sweep)
    sweep.add_argument("--axis", choices=["workers", "rate"])
    sweep.add_argument("--values", type=_float_list, metavar="V1,V2,...")
    sweep.add_argument("--threshold", type=float, help="Train loss threshold")
    sweep.set_defaults(handler=commands.cmd_sweep)

    gen = sub.add_parser("gen-data", help="Write a bundled synthetic dataset as LIBSVM")
    gen.add_argument("name", choices=["lowdiv", "highdiv"])
    gen.add_argument("output", help="Destination file")
    _add_data_options(gen)
    gen.set_defaults(handler=commands.cmd_gen_data)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(get_settings(), level=args.log_level)
    try:
        return args.handler(args)
    except (StaleboostError, OSError, ValidationError, yaml.YAMLError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        logger.exception("Internal error in %s", args.command)
        return EXIT_INTERNAL
