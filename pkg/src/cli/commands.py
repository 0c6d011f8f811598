"""
Subcommand handlers. Each returns a process exit code.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from core.config import get_settings
from core.errors import ConfigurationError, DatasetError
from boosting.forest import load_forest, save_forest
from boosting.metrics import evaluate
from boosting.sampler import SamplingPlan, estimate_diversity
from dataset.libsvm import write_libsvm
from dataset.preprocessing import dataset_stats
from dataset.synthetic import make_highdiv, make_lowdiv
from theory.calculator import contraction, max_workers, plan_steps
from theory.estimation import estimate_constants
from theory.models import TheoryConstants
from training.sweep import run_sweep
from training.trainer import train_async
from .reporting import print_report, write_table
from .runconfig import DataSection, RunConfig, load_dataset, load_run_config, load_train_test


logger = logging.getLogger(__name__)

FOREST_FILE = "forest.txt"
HISTORY_FILE = "history.csv"
MANIFEST_FILE = "manifest.yaml"
SUMMARY_FILE = "summary.csv"

THEORY_COLUMNS = ["tau", "v", "t", "C1", "C2", "r", "diameter"]
RATE_COLUMNS = ["rate", "omega", "delta", "rho", "v", "t", "C1", "C2", "r", "diameter"]
CONSTANT_FIELDS = ("c", "lam", "M", "omega", "delta_cap", "rho", "zeta", "tau", "delta_leaf", "m_max", "phi")


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides: List[str] = list(args.set or [])
    for flag, key in (
        ("n_trees", "training.n_trees"),
        ("workers", "training.n_workers"),
        ("step", "training.step"),
        ("mode", "training.mode"),
        ("rate", "sampling.rate"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{key}={value}")
    for flag, key in (("data", "data.train"), ("test", "data.test")):
        value = getattr(args, flag, None)
        if value is not None:
            # JSON strings are YAML strings, so paths are never retyped
            overrides.append(f"{key}={json.dumps(value)}")
    return load_run_config(args.config, overrides)


def _output_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    path = Path(args.output or config.output.dir or get_settings().output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(path: Path, config: RunConfig, extra: Dict[str, Any]) -> None:
    manifest = dict(extra)
    manifest["config"] = config.echo()
    with path.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(manifest, handle, sort_keys=False)


def cmd_train(args: argparse.Namespace) -> int:
    config = _run_config(args)
    train, test = load_train_test(config.data)
    train_config = config.to_train_config()
    forest, history = train_async(train, train_config, test=test)

    out = _output_dir(args, config)
    save_forest(forest, out / FOREST_FILE)
    history.to_csv(out / HISTORY_FILE)
    _write_manifest(out / MANIFEST_FILE, config, {
        "f0": forest.f0,
        "step": train_config.step,
        "n_trees": len(forest),
        "fingerprint": forest.fingerprint,
        "sample_seed": train_config.sample_seed,
        "schedule_seed": train_config.schedule_seed,
        "max_staleness_observed": history.max_staleness(),
        "mean_build_time": _plain(history.mean_build_time()),
        "mean_server_time": _plain(history.mean_server_time()),
    })

    print_report({
        "output": str(out),
        "n_trees": len(forest),
        "train_loss": history.final_train_loss(),
        "max_staleness": history.max_staleness(),
    }, sys.stdout)
    return 0


def _plain(value: float) -> Optional[float]:
    return None if math.isnan(value) else float(value)


def cmd_eval(args: argparse.Namespace) -> int:
    forest = load_forest(args.forest)
    ds = load_dataset(args.data, _data_section(args))
    if forest.fingerprint and forest.fingerprint != ds.fingerprint():
        logger.info("Evaluating on a dataset other than the training set")
    metrics = evaluate(forest, ds)
    print_report(metrics.as_dict(), sys.stdout)
    return 0


def _data_section(args: argparse.Namespace) -> DataSection:
    values = {}
    for key in ("scale", "n_samples", "synthetic_seed", "n_features"):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    return DataSection(**values)


def cmd_stats(args: argparse.Namespace) -> int:
    ds = load_dataset(args.data, _data_section(args))
    plan = SamplingPlan.uniform(args.rate, ds)
    diversity = estimate_diversity(plan, ds, trials=args.trials, seed=args.seed)

    report: Dict[str, Any] = dict(dataset_stats(ds))
    report["rate"] = args.rate
    report.update({k: v for k, v in diversity.as_dict().items() if k != "n_samples"})
    print_report(report, sys.stdout)
    if args.csv:
        write_table([list(report.values())], list(report.keys()), path=args.csv)
    return 0


def _constants_from_flags(args: argparse.Namespace) -> TheoryConstants:
    values = {}
    for name in CONSTANT_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    if "c" not in values or "lam" not in values:
        logger.warning("c and/or lambda not supplied; using 1.0")
    return TheoryConstants(**values)


def _estimated_constants(args: argparse.Namespace) -> Tuple[TheoryConstants, Dict[str, Any]]:
    run_dir = Path(args.estimate_from)
    config = load_run_config(run_dir / MANIFEST_FILE)
    forest = load_forest(run_dir / FOREST_FILE)
    train, _ = load_train_test(config.data)
    plan = SamplingPlan.uniform(config.sampling.rate, train)

    with (run_dir / MANIFEST_FILE).open("r", encoding="utf-8") as handle:
        manifest = yaml.safe_load(handle) or {}
    tau = args.tau if args.tau is not None else float(manifest.get("max_staleness_observed", 0))

    estimate = estimate_constants(
        train, plan, forest,
        trials=args.trials, seed=args.seed,
        c=args.c, lam=args.lam, tau=tau,
    )
    extra = {
        "projected_rho": estimate.projected_rho,
        "trees_used": estimate.trees_used,
    }
    if manifest.get("mean_build_time") and manifest.get("mean_server_time"):
        extra["worker_bound_measured"] = max_workers(manifest["mean_build_time"], manifest["mean_server_time"])
    return estimate.constants, extra


def _parse_range(text: str) -> List[int]:
    start, sep, stop = text.partition(":")
    try:
        low, high = int(start), int(stop)
    except ValueError:
        raise ConfigurationError(f"range must look like a:b, got {text!r}")
    if not sep or high < low:
        raise ConfigurationError(f"range must look like a:b with a <= b, got {text!r}")
    return list(range(low, high + 1))


def _theory_row(constants: TheoryConstants, args: argparse.Namespace) -> Dict[str, Any]:
    steps = plan_steps(constants, args.epsilon, args.theta, args.d0, args.log_numerator)
    v = args.v if args.v is not None else steps.v
    report = contraction(constants, v)
    return {
        "v": steps.v,
        "t": steps.t,
        "C1": report.C1,
        "C2": report.C2,
        "r": report.r,
        "diameter": report.diameter,
        "contracting": report.contracting,
    }


def cmd_theory(args: argparse.Namespace) -> int:
    extra: Dict[str, Any] = {}
    if args.estimate_from:
        constants, extra = _estimated_constants(args)
    else:
        constants = _constants_from_flags(args)

    if args.sweep_tau:
        rows = []
        for tau in _parse_range(args.sweep_tau):
            row = _theory_row(constants.with_changes(tau=float(tau)), args)
            rows.append([tau] + [row[c] for c in THEORY_COLUMNS[1:]])
        write_table(rows, THEORY_COLUMNS, path=args.csv, stream=sys.stdout)
        return 0

    if args.sweep_rate:
        if not args.data:
            raise ConfigurationError("--sweep-rate needs --data")
        ds = load_dataset(args.data, _data_section(args))
        rows = []
        for rate in args.sweep_rate:
            diversity = estimate_diversity(SamplingPlan.uniform(rate, ds), ds, trials=args.trials, seed=args.seed)
            swept = constants.with_changes(
                omega=float(max(diversity.omega, 1)),
                delta_cap=diversity.delta,
                rho=max(diversity.rho, 1.0 / (args.trials - 1)),
            )
            row = _theory_row(swept, args)
            rows.append([rate, swept.omega, swept.delta_cap, swept.rho] + [row[c] for c in RATE_COLUMNS[4:]])
        write_table(rows, RATE_COLUMNS, path=args.csv, stream=sys.stdout)
        return 0

    report: Dict[str, Any] = {f"const_{k}": v for k, v in constants.to_dict().items()}
    report.update(_theory_row(constants, args))
    if args.t_build is not None and args.t_comm is not None:
        report["worker_bound"] = max_workers(args.t_build, args.t_comm)
    report.update(extra)
    report["note"] = "step length uses 4*rho*tau^2*omega*sqrt(delta); iteration bound uses 6*rho*tau^2*omega*sqrt(delta)*log(L*D0/eps)"
    print_report(report, sys.stdout)
    if args.csv:
        write_table([list(report.values())], list(report.keys()), path=args.csv)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _run_config(args)
    threshold = args.threshold if args.threshold is not None else config.sweep.threshold
    if threshold is None:
        raise ConfigurationError("sweep needs a loss threshold (--threshold or sweep.threshold)")
    axis = args.axis or config.sweep.axis
    values = args.values or config.sweep.values

    train, test = load_train_test(config.data)
    out = _output_dir(args, config)
    cells = run_sweep(train, config.to_train_config(), axis, values, threshold, test=test, output_dir=out)
    _write_manifest(out / MANIFEST_FILE, config, {
        "axis": str(getattr(axis, "value", axis)),
        "values": [float(v) for v in values],
        "threshold": float(threshold),
    })

    for cell in cells:
        print_report({
            "value": cell.summary_row()[1],
            "updates_to_threshold": cell.updates_to_threshold,
            "final_loss": cell.final_loss,
            "saturated": cell.saturated,
        }, sys.stdout)
    return 0


def cmd_gen_data(args: argparse.Namespace) -> int:
    if args.name == "lowdiv":
        ds = make_lowdiv(scale=args.scale if args.scale is not None else 1.0)
    elif args.name == "highdiv":
        ds = make_highdiv(
            n_samples=args.n_samples or 2000,
            n_features=args.n_features or 100,
            seed=args.synthetic_seed or 0,
        )
    else:
        raise DatasetError(f"unknown synthetic dataset: {args.name!r}")
    path = write_libsvm(ds, args.output)
    print_report({"output": str(path), **dataset_stats(ds)}, sys.stdout)
    return 0
