#!/usr/bin/env python3
"""Print the attracting-orbit period along a fixed-Na ray.

Walks from just right of the fold toward the Hopf point and reports the
measured period at each calcium value: divergence at the fold end, the
flat ~10 ms pool in the middle, and the slight upturn near the Hopf curve.
"""
import argparse
import sys

import numpy as np

from burstlab.figures import compute_curves, model_for
from burstlab.landscape import orbit_period


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--na", type=float, default=5.2)
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()
    fast = model_for("reduced4d")
    snic, ah = compute_curves(fast)
    lo = snic.ca_at(args.na) + 1e-3
    hi = ah.ca_at(args.na) - 1e-3
    print(f"Na = {args.na}: SNIC at Ca = {snic.ca_at(args.na):.5f}, "
          f"AH at Ca = {ah.ca_at(args.na):.5f}")
    for ca in np.linspace(lo, hi, args.points):
        p = orbit_period(fast, (float(ca), args.na), t_measure=3000.0)
        print(f"  Ca = {ca:.5f}: {'undefined' if p is None else f'{p:9.3f} ms'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
