"""Command line interface: run grids, list presets, validate configs."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .runner import run_grid, timings_path
from .streams import PRESETS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftlearn",
        description="Budgeted online learning on drifting streams with instance replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run the experiment grid from a config file")
    run_parser.add_argument("config", help="path to a key = value config file")
    run_parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run_parser.add_argument("--output", help="results CSV path (overrides config)")
    run_parser.add_argument(
        "--seed-override", type=int, default=None, help="run only this seed"
    )

    presets_parser = sub.add_parser("presets", help="synthetic stream presets")
    presets_parser.add_argument("action", choices=["list"])

    validate_parser = sub.add_parser("validate", help="parse a config and report the grid")
    validate_parser.add_argument("config")
    return parser


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    rows, path = run_grid(
        config, jobs=args.jobs, output=args.output, seed_override=args.seed_override
    )
    print(f"wrote {len(rows)} result rows to {path}")
    print(f"timings in {timings_path(path)}")
    return 0


def _cmd_presets() -> int:
    header = f"{'name':<8} {'family':<8} {'instances':>10} {'features':>8} "
    header += f"{'classes':>7} {'width':>7} {'drifts':>6} {'noise':>6} {'rotation':>8}"
    print(header)
    for name, recipe in PRESETS.items():
        print(
            f"{name:<8} {recipe.family:<8} {recipe.length:>10} {recipe.n_features:>8} "
            f"{recipe.class_count:>7} {recipe.drift_width:>7} {recipe.drift_count:>6} "
            f"{recipe.noise:>6} {recipe.rotation_rate:>8}"
        )
    return 0


def _cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"config ok: {config.stream} / {config.learner} / {config.query}")
    print(f"strategies: {', '.join(config.strategies)}  ensemble: {config.ensemble}")
    print(f"budgets: {list(config.budgets)}")
    print(f"alpha_theta: {list(config.alpha_theta)}")
    print(f"lambda_max: {list(config.lambda_max)}")
    print(f"seeds: {list(config.seeds)}")
    print(f"grid cells: {config.cell_count()}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "presets":
        return _cmd_presets()
    return _cmd_validate(args)


if __name__ == "__main__":
    raise SystemExit(main())
