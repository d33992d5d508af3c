"""Command-line interface.

Subcommands map one-to-one to pipelines.  Exit codes: 0 on success, 2 when a
recorded pipeline check fails (topology or bound assertions), 1 on config or
I/O errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ExperimentConfig
from .pipelines import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentcloud",
        description="Synthetic latent-geometry experiments: concentration, "
                    "persistent homology, and geodesic isometry checks.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="JSON config file (flat key-value)")
        cmd.add_argument("--out-dir", help="artifact output directory")
        cmd.add_argument("--seed", type=int, help="base seed")
        cmd.add_argument("--threads", type=int, help="worker parallelism cap")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        base = ExperimentConfig.load(args.config).to_dict() if args.config else {}
        base["experiment"] = args.experiment
        for key in ("out_dir", "seed", "threads"):
            val = getattr(args, key)
            if val is not None:
                base[key] = val
        cfg = ExperimentConfig.from_dict(base)
    except (OSError, ValueError, TypeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1

    try:
        report = run_experiment(cfg)
    except (OSError, ValueError, MemoryError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    for name, ok in report.checks.items():
        print(f"check {name}: {'pass' if ok else 'FAIL'}")
    print(f"artifacts written to {cfg.out_dir}")
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
