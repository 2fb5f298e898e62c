#!/usr/bin/env python3
"""Run every config under configs/ through its matching subcommand.

Outputs land in results/ (override with --outdir), one CSV per config plus
whatever side files the subcommand emits (plot projections for sweep, block
and pair tables for cotlar).

Example:
  python3 scripts/run_all_experiments.py
  python3 scripts/run_all_experiments.py --outdir /tmp/fiochain_results --profile
"""

from __future__ import annotations

import argparse
from pathlib import Path

from fiochain.cli import main as fiochain_main

# config stem -> subcommand
RUNS = [
    ("contraction_norms", "norm"),
    ("contraction_residual", "propagate"),
    ("contraction_decay_sweep", "sweep"),
    ("surface_bounds", "norm"),
    ("surface_cotlar", "cotlar"),
    ("identity_check", "norm"),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configdir", default=None, help="directory with the JSON configs")
    ap.add_argument("--outdir", default=None, help="where to write the CSVs")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--profile", action="store_true", help="populate wall_ms columns")
    args = ap.parse_args()

    root = Path(__file__).resolve().parent.parent
    configdir = Path(args.configdir) if args.configdir else root / "configs"
    outdir = Path(args.outdir) if args.outdir else root / "results"
    outdir.mkdir(parents=True, exist_ok=True)

    worst = 0
    for stem, command in RUNS:
        cfg = configdir / f"{stem}.json"
        out = outdir / f"{stem}.csv"
        argv = [command, "--config", str(cfg), "--out", str(out)]
        if args.threads is not None:
            argv += ["--threads", str(args.threads)]
        if args.profile:
            argv.append("--profile")
        print(f"fiochain {' '.join(argv)}")
        rc = fiochain_main(argv)
        print(f"  -> exit {rc}, wrote {out}")
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
