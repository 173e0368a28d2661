"""Render the CSVs written by the other scripts (requires matplotlib)."""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def num(v):
    return float("nan") if v == "NA" else float(v)


def boxplot(path, key, value, title, out):
    groups = defaultdict(list)
    for r in rows(path):
        groups[r[key]].append(num(r[value]))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.boxplot(list(groups.values()))
    ax.set_xticks(range(1, len(groups) + 1), list(groups), rotation=20)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def lines(path, series_keys, x, y, ref, title, out, logx=False):
    groups = defaultdict(list)
    for r in rows(path):
        groups[" ".join(r[k] for k in series_keys)].append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, rs in groups.items():
        xs = [num(r[x]) for r in rs]
        (h,) = ax.plot(xs, [num(r[y]) for r in rs], "o", label=name)
        ax.plot(xs, [num(r[ref]) for r in rs], "-", color=h.get_color(), alpha=0.6)
    if logx:
        ax.set_xscale("log")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dir", type=Path, default=Path(__file__).parent / "output")
    d = p.parse_args().dir
    jobs = [
        ("toy_estimates.csv", lambda f: boxplot(f, "estimator", "estimate", "toy estimates", d / "toy.png")),
        ("regime_sweep.csv", lambda f: lines(f, ("regime", "estimator"), "n", "scaled_variance",
                                             "theory_asymptote", "min(n, m) x variance", d / "sweep.png", True)),
        ("shifted_covariate.csv", lambda f: lines(f, ("trial_law",), "shift_param", "empirical_factor",
                                                  "theory_factor", "variance inflation", d / "shifted.png")),
        ("effect_modifier.csv", lambda f: lines(f, ("adjustment",), "n", "scaled_variance", "theory_asymptote",
                                                "n x variance", d / "modifier.png", True)),
        ("semi_synthetic_estimates.csv", lambda f: boxplot(f, "adjustment", "estimate", "semi-synthetic",
                                                           d / "semi_synthetic.png")),
    ]
    for name, fn in jobs:
        if (d / name).exists():
            fn(d / name)
            print(f"rendered {name}")


if __name__ == "__main__":
    main()
