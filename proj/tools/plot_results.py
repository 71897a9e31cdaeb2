#!/usr/bin/env python3
"""Plot sweep and validation CSVs produced by the xbarnn CLI.

Usage:
  plot_results.py sweep    <sweep_summary.csv> <out.png>
  plot_results.py validate <validate.csv>      <out.png>

Keeps the core artifact free of plotting dependencies; needs matplotlib.
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_sweep(rows, out_path):
    # Degradation vs rneu_ratio, one line per (mode, rs_ratio), k_sigma = 0.
    series = defaultdict(list)
    for row in rows:
        if int(row["k_sigma"]) != 0:
            continue
        key = (row["mode"], float(row["rs_ratio"]), row["tiles"])
        series[key].append((float(row["rneu_ratio"]), float(row["mean_degradation"])))
    fig, ax = plt.subplots(figsize=(6, 4))
    for (mode, rs, tiles), points in sorted(series.items()):
        points.sort()
        style = "-o" if mode == "ideal" else "--s"
        label = f"{mode} rs={rs:g}" + ("" if tiles == "full" else f" {tiles}")
        ax.plot([p[0] for p in points], [p[1] for p in points], style, label=label)
    ax.set_xlabel("R_neu / R_high")
    ax.set_ylabel("accuracy degradation (points)")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)


def plot_validate(rows, out_path):
    fig, ax = plt.subplots(figsize=(6, 4))
    series = defaultdict(list)
    for row in rows:
        series[float(row["rs_ratio"])].append(
            (float(row["rneu_ratio"]), float(row["nrmsd"])))
    for rs, points in sorted(series.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], "-o", label=f"rs={rs:g}")
    ax.set_xlabel("R_neu / R_high")
    ax.set_ylabel("NRMSD (model vs nodal solve)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)


def main():
    if len(sys.argv) != 4 or sys.argv[1] not in ("sweep", "validate"):
        print(__doc__, file=sys.stderr)
        return 2
    rows = load(sys.argv[2])
    if sys.argv[1] == "sweep":
        plot_sweep(rows, sys.argv[3])
    else:
        plot_validate(rows, sys.argv[3])
    print(f"wrote {sys.argv[3]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
