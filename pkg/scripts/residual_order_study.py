#!/usr/bin/env python3
"""Residual of the leading-order plane-wave image as hbar shrinks.

Propagates a plane wave through a fixed-length contraction chain at several
hbar values, prints the relative residual per hbar, and fits the log-log
slope.  A slope near 1 means the neglected corrections enter at first order
in hbar, so halving hbar should roughly halve the residual.

Example:
  python3 scripts/residual_order_study.py
  python3 scripts/residual_order_study.py --n 4 --hbar 0.005 0.0025 0.00125 --n-points 1024
"""

from __future__ import annotations

import argparse

from fiochain.bounds import loglog_slope
from fiochain.scenarios import build_scenario, make_operators
from fiochain.wkb import wkb_residual


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="isotropic_contraction")
    ap.add_argument("--n", type=int, default=4, help="chain length")
    ap.add_argument(
        "--hbar", type=float, nargs="+", default=[0.005, 0.0025, 0.00125], help="descending hbar values"
    )
    ap.add_argument("--n-points", type=int, default=1024, help="grid points per axis")
    args = ap.parse_args()

    residuals = []
    print(f"{'hbar':>12}  {'relative residual':>18}")
    for hbar in args.hbar:
        spec = build_scenario(args.scenario, {"hbar": hbar, "n_points": args.n_points})
        ops = make_operators(spec, args.n)
        res = wkb_residual(ops, spec.xi0, args.n)
        residuals.append(res.relative)
        print(f"{hbar:>12.6g}  {res.relative:>18.6e}")

    slope = loglog_slope(args.hbar, residuals)
    print(f"\nlog-log slope of residual vs hbar: {slope:.3f}")
    decreasing = all(a > b for a, b in zip(residuals, residuals[1:]))
    print(f"strictly decreasing: {decreasing}")
    return 0 if slope >= 0.8 and decreasing else 1


if __name__ == "__main__":
    raise SystemExit(main())
