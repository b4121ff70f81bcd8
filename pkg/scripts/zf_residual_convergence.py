#!/usr/bin/env python3
"""Time the ZF-relation verifier and record residuals across grid sizes.

Residuals should sit at roundoff for every grid (the relations hold
exactly for the discretized operators); the interesting output is the
scaling of the verification cost with n_points and n_max.

Usage:
    python3 scripts/zf_residual_convergence.py --sizes 8 12 16
"""

import argparse
import sys
import time

from zfqft import smatrix
from zfqft.fockspace import FockSpace, RapidityGrid, verify_zf_relations


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--family", type=str, default="sinh_factor",
                    choices=sorted(smatrix.BUILTIN_FAMILIES))
    args = ap.parse_args(argv)

    S = smatrix.BUILTIN_FAMILIES[args.family]()
    print(f"family: {S.label()}, n_max = {args.n_max}")
    print(f"{'n_points':>8} {'creator':>12} {'annihilator':>12} "
          f"{'mixed':>12} {'seconds':>9}")
    for m in args.sizes:
        grid = RapidityGrid(-3.0, 3.0, m, 1.0)
        space = FockSpace(grid, S, n_max=args.n_max)
        t0 = time.monotonic()
        rep = verify_zf_relations(space)
        dt = time.monotonic() - t0
        r = rep.residuals
        print(f"{m:8d} {r['creator_exchange']:12.3e} "
              f"{r['annihilator_exchange']:12.3e} "
              f"{r['mixed_with_delta']:12.3e} {dt:9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
