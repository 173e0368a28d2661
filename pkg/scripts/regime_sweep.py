"""Scaled variance of the estimated IPSW along growing trial sizes, per regime.

Writes regime_sweep.csv with one row per (regime, n, estimator).
"""

import math

from _common import parser, write_csv

from ipsw.scenarios import toy_dgp
from ipsw.simulate import FixedM, Ratio, regime_sweep

GRID = (100, 200, 500, 1000, 2000, 5000)


def main():
    a = parser("asymptotic regime sweep on the toy example", reps=2000).parse_args()
    spec = toy_dgp()
    regimes = {"fixed_m=50": FixedM(50), "ratio=0.1": Ratio(0.1), "ratio=1": Ratio(1.0),
               "ratio=10": Ratio(10.0), "ratio=inf": Ratio(math.inf)}
    rows = []
    for k, (name, regime) in enumerate(regimes.items()):
        for r in regime_sweep(spec, GRID, regime, a.reps, a.seed + k, workers=a.workers):
            rows.append((name, r.n, r.m, r.estimator.cli_name, r.scaled_variance,
                         r.scaled_variance_mc_se, r.theory_asymptote))
    write_csv(a.out_dir / "regime_sweep.csv",
              ("regime", "n", "m", "estimator", "scaled_variance", "scaled_variance_mc_se", "theory_asymptote"),
              rows)


if __name__ == "__main__":
    main()
