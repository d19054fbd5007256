#!/usr/bin/env python3
"""Departure-abscissa scaling sweep over the four standard (k, n) pairs.

Fits log x_eps against log eps and compares the slope with
lambda* = n / (1 + 2k(n-1)) and the prefactor with the rescaled-model
prediction eta = c_x * u*.
"""

import argparse
import sys

import numpy as np

from regtang import (
    TransitionConfig,
    departure_prefactor,
    find_x_epsilon,
    fit_scaling,
    lambda_star,
)
from regtang.scenarios import canonical_system

PAIRS = [(1, 2), (1, 3), (2, 3), (2, 6)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps-lo", type=float, default=1e-6)
    ap.add_argument("--eps-hi", type=float, default=1e-2)
    ap.add_argument("--points", type=int, default=9)
    args = ap.parse_args(argv)

    eps_values = np.geomspace(args.eps_lo, args.eps_hi, args.points)
    failures = 0
    print(f"{'pair':>6}  {'lambda*':>10}  {'slope':>10}  {'dev%':>6}  "
          f"{'r2':>10}  {'exp(b)':>8}  {'eta':>8}")
    for k, n in PAIRS:
        ls = lambda_star(k, n)
        sys_ = canonical_system(k=k)
        cfg = TransitionConfig(k=k, n=n, lam=0.999 * ls)
        xs = [find_x_epsilon(sys_, cfg, float(e)) for e in eps_values]
        fit = fit_scaling(eps_values, xs, predicted_slope=ls)
        eta = departure_prefactor(k, n)["eta"]
        dev = 100 * abs(fit.slope - ls) / ls
        ok = dev <= 5.0 and fit.r2 >= 0.999
        failures += 0 if ok else 1
        print(f"({k},{n})  {ls:10.6f}  {fit.slope:10.6f}  {dev:6.2f}  "
              f"{fit.r2:10.8f}  {np.exp(fit.intercept):8.4f}  {eta:8.4f}"
              f"  [{'PASS' if ok else 'FAIL'}]")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
