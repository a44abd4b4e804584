"""Independent brute-force oracles used by the tests.

These deliberately avoid the production algorithms: fold locations come
from bisection on the equilibrium count, Hopf locations from a sign scan of
the eigenvalue real part, and contour points from one-dimensional bisection
along a fixed-Na ray. Scans run at 1e-4 steps inside a coarse bracket.
"""
from __future__ import annotations

import numpy as np

from burstlab.bifurcation import equilibrium_count, hopf_test


def fold_ca_oracle(fast, na, ca_window=(-0.2, 1.6), fine_step=1e-4):
    """Ca of the 3 -> 1 equilibrium-count change, scanned at fine_step."""
    lo, hi = ca_window
    grid = np.arange(lo, hi, 0.01)
    counts = [equilibrium_count(fast, (ca, na)) for ca in grid]
    for i in range(len(grid) - 1):
        if counts[i] >= 3 and counts[i + 1] < 3:
            a, b = grid[i], grid[i + 1]
            fine = np.arange(a, b + fine_step, fine_step)
            prev = a
            for ca in fine:
                if equilibrium_count(fast, (ca, na)) < 3:
                    return 0.5 * (prev + ca)
                prev = ca
    return None


def hopf_ca_oracle(fast, na, ca_window=(0.0, 1.6), fine_step=1e-4):
    """Ca where Re of the depolarized complex pair changes sign."""
    grid = np.arange(ca_window[0], ca_window[1], 0.01)
    prev = None
    for ca in grid:
        r = hopf_test(fast, (ca, na))
        if r is None:
            prev = None
            continue
        if prev is not None and prev[1] > 0 >= r:
            fine = np.arange(prev[0], ca + fine_step, fine_step)
            last = prev[0]
            for cf in fine:
                rf = hopf_test(fast, (cf, na))
                if rf is None or rf <= 0:
                    return 0.5 * (last + cf)
                last = cf
        prev = (ca, r)
    return None


def relambda_level_ca_oracle(fast, na, level, ca_start, ca_stop,
                             tol=1e-6):
    """Ca where Re(lambda) crosses a level, by bisection along fixed Na."""
    lo, hi = ca_start, ca_stop
    r_lo = hopf_test(fast, (lo, na))
    r_hi = hopf_test(fast, (hi, na))
    if r_lo is None or r_hi is None or (r_lo - level) * (r_hi - level) > 0:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r = hopf_test(fast, (mid, na))
        if r is None:
            return None
        if (r - level) * (r_lo - level) > 0:
            lo, r_lo = mid, r
        else:
            hi = mid
    return 0.5 * (lo + hi)
