#!/usr/bin/env python3
"""Plot rejection proportion against the deviation size c.

Input is the long CSV written by `qrlof simulate --c-grid ...`:

    qrlof simulate --model 6 --n 150 --c-grid 0,0.25,0.5,1 --tau 0.25 > curve.csv
    python3 tools/plot_power.py curve.csv power.png --alpha 0.05
"""

import argparse
import csv
from collections import defaultdict


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv")
    parser.add_argument("output")
    parser.add_argument("--alpha", type=float, default=0.05)
    args = parser.parse_args()

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    curves = defaultdict(list)
    with open(args.csv, newline="") as handle:
        for row in csv.DictReader(handle):
            if abs(float(row["alpha"]) - args.alpha) > 1e-12:
                continue
            key = (row["test"], row["tau"])
            curves[key].append((float(row["c"]), float(row["proportion"])))

    fig, ax = plt.subplots(figsize=(6, 4))
    for (test, tau), points in sorted(curves.items()):
        points.sort()
        style = "-" if test == "projection" else "--"
        ax.plot([c for c, _ in points], [p for _, p in points], style, marker="o",
                label=f"{test}, tau={tau}")
    ax.axhline(args.alpha, color="grey", linewidth=0.8)
    ax.set_xlabel("c")
    ax.set_ylabel("rejection proportion")
    ax.set_ylim(0, 1)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
