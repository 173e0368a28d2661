"""Variance with and without a non-shifted effect modifier, along the trial size.

Writes effect_modifier.csv with the n-scaled variances and their asymptotes.
"""

from _common import parser, write_csv

from ipsw.estimators import Tag
from ipsw.scenarios import NonshiftedModifier, toy_extended_dgp
from ipsw.simulate import McConfig, simulate_views
from ipsw.theory import effect_modifier_reduction

GRID = (150, 500, 1000, 3000)
TAG = Tag.IPSW_SEMI_PIHAT


def main():
    a = parser("non-shifted effect modifier", reps=1000).parse_args()
    ext = toy_extended_dgp(mode=NonshiftedModifier())
    report = effect_modifier_reduction(ext)
    rows = []
    for i, n in enumerate(GRID):
        cfg = McConfig(n, None, a.reps, a.seed, (TAG,))
        views = simulate_views(ext.flatten(), cfg, {"with_v": None, "without_v": ext.coarsen_map()},
                               workers=a.workers, stream=(i,))
        for name, asym in (("with_v", report.extended_asymptotic_variance),
                           ("without_v", report.base_asymptotic_variance)):
            r = views[name].row(TAG)
            rows.append((n, name, n * r.variance, n * r.variance_mc_se, asym))
    write_csv(a.out_dir / "effect_modifier.csv",
              ("n", "adjustment", "scaled_variance", "scaled_variance_mc_se", "theory_asymptote"), rows)


if __name__ == "__main__":
    main()
