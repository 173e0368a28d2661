"""Variance inflation from adjusting on a shifted covariate that does not modify the effect.

Writes shifted_covariate.csv for a balanced and an imbalanced trial law of V.
"""

from _common import parser, write_csv

from ipsw.estimators import Tag
from ipsw.scenarios import BALANCED_Q_R, IMBALANCED_Q_R, toy_dgp
from ipsw.simulate import inflation_experiment, shift_family

SHIFTS = (0.0, 0.2, 0.4, 0.6, 0.8)


def main():
    p = parser("shifted non-modifier inflation", reps=1000)
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--m", type=int, default=1000)
    a = p.parse_args()
    rows = []
    for name, q_R in (("balanced", BALANCED_Q_R), ("imbalanced", IMBALANCED_Q_R)):
        grid = shift_family(q_R, SHIFTS, toward=0)
        for r in inflation_experiment(toy_dgp(), grid, a.n, a.m, a.reps, a.seed, shift_params=SHIFTS,
                                      estimator=Tag.IPSW_EST_PIHAT, workers=a.workers):
            rows.append((name, r.shift_param, r.q_T[0], r.theory_factor, r.empirical_factor, r.mc_se))
    write_csv(a.out_dir / "shifted_covariate.csv",
              ("trial_law", "shift_param", "q_T0", "theory_factor", "empirical_factor", "mc_se"), rows)


if __name__ == "__main__":
    main()
