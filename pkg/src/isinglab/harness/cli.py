"""`lab` command line: run one configured experiment and emit reports.

    lab <experiment> --config <file> [--seed N] [--out DIR] [--format csv|json]

Exit codes: 0 success, 2 configuration error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, BudgetError, ConfigError, load_config
from .experiments import run_experiment
from .report import emit_report

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="run a configured lattice-dynamics experiment")
    sub = parser.add_subparsers(dest="experiment", required=True,
                                metavar="experiment")
    for kind in EXPERIMENTS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="override the output format")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides={
            "seed": args.seed, "out": args.out, "format": args.format})
        if cfg.experiment != args.experiment:
            raise ConfigError(
                f"config describes {cfg.experiment!r}, "
                f"command line asked for {args.experiment!r}")
        table = run_experiment(cfg)
        paths = emit_report(table, out_dir=cfg.out or ".", format=cfg.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    print(f"{table.experiment}: {len(table.rows)} rows "
          f"(config {table.config_hash})")
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
