#!/usr/bin/env python3
"""Measure per-iterate bi-Lipschitz constants of the diagonal-shift map.

For p = 1..p_max, samples pairs (t, t') and reports

    c1(p) = min ||f^p t - f^p t'|| / ||t - t'||
    c2(p) = max ||f^p t - f^p t'|| / ||t - t'||

against the compounding band [(1-theta)^p, (1+theta)^p] and the uniform
gate ((1+theta)/(1-theta))^p.  The growth is measured, not assumed.

Usage:
    python scripts/iterate_growth.py --n 32 --theta 0.5 --p-max 8 --pairs 2000
"""

import argparse
import csv
import sys

import numpy as np

from seqcert.fpmaps import AffineMapSpec, apply_map_batch, make_alpha_schedule
from seqcert.sampling import simplex_uniform
from seqcert.sequences import builtin_sequence


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=32, help="truncation of the ell_1 family")
    ap.add_argument("--theta", type=float, default=0.5)
    ap.add_argument("--p-max", type=int, default=8)
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="optional CSV path")
    args = ap.parse_args()

    if args.p_max >= args.n:
        print("error: p_max must be below n", file=sys.stderr)
        return 2
    s = builtin_sequence("ell1_canonical", args.n)
    sch = make_alpha_schedule(args.theta, 1, 1, 1, args.n)
    spec = AffineMapSpec.diag_shift(sch)

    start = args.n - args.p_max
    rng = np.random.default_rng(args.seed)
    X = simplex_uniform(rng, args.pairs, start)
    Y = simplex_uniform(rng, args.pairs, start)
    base = s.span_norm_batch(X - Y)
    keep = base > 1e-12
    X, Y, base = X[keep], Y[keep], base[keep]

    rows = []
    header = ("p", "c1", "c2", "L", "band_low", "band_high", "uniform_gate")
    print(("{:>4} " + "{:>12} " * 6).format(*header))
    FX, FY = X, Y
    for p in range(1, args.p_max + 1):
        FX = apply_map_batch(spec, FX)
        FY = apply_map_batch(spec, FY)
        ratios = s.span_norm_batch(FX - FY) / base
        c1, c2 = float(ratios.min()), float(ratios.max())
        row = (
            p,
            c1,
            c2,
            c2 / c1,
            (1 - args.theta) ** p,
            (1 + args.theta) ** p,
            ((1 + args.theta) / (1 - args.theta)) ** p,
        )
        rows.append(row)
        print(("{:>4d} " + "{:>12.6f} " * 6).format(*row))

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
