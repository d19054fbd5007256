#!/usr/bin/env python3
"""Image-diameter sweep for the upper and lower transition maps.

With lam = lambda*/2 the image diameter should shrink like
exp(-c / sqrt(eps)); below eps ~ 1e-3 the true diameter sinks under the
integration floor, so the table is read as an upper bound there.
"""

import argparse
import sys

import numpy as np

from regtang import (
    IntegratorConfig,
    TransitionConfig,
    lower_transition_map,
    predicted_upper_boundary,
    upper_transition_map,
)
from regtang.scenarios import canonical_system


def sweep(sys_, cfg, eps, side, n_inputs):
    if side == "upper":
        grid = np.linspace(eps, predicted_upper_boundary(sys_, cfg, eps), n_inputs)
        outs = [upper_transition_map(sys_, cfg, eps, float(y)).y_out for y in grid]
    else:
        grid = np.linspace(-2.0 * eps, 0.95 * eps, n_inputs)
        outs = [lower_transition_map(sys_, cfg, eps, float(y)).y_out for y in grid]
    return max(outs) - min(outs), grid[-1] - grid[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 4e-3, 1e-3])
    ap.add_argument("--inputs", type=int, default=9)
    args = ap.parse_args(argv)

    sys_ = canonical_system(k=args.k)
    cfg = TransitionConfig(k=args.k, n=args.n,
                           integ=IntegratorConfig(rtol=1e-12, atol=1e-14))
    print(f"{'side':>6}  {'eps':>10}  {'1/sqrt(eps)':>12}  {'diameter':>12}  "
          f"{'input length':>12}  {'diam/len':>10}")
    for side in ("upper", "lower"):
        for eps in args.eps:
            diam, length = sweep(sys_, cfg, eps, side, args.inputs)
            print(f"{side:>6}  {eps:10.2e}  {eps ** -0.5:12.3f}  {diam:12.3e}  "
                  f"{length:12.5f}  {diam / length:10.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
