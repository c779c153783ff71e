#!/usr/bin/env python3
"""Render PNG figures from otcic output directories.

    python3 tools/plot_outputs.py sim/    # after `otcic simulate`
    python3 tools/plot_outputs.py ck/     # after `otcic ck --analysis table2`

Needs matplotlib. Figures are written next to the CSV files.
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

METHODS = ("truth", "ot", "cic")


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_marginals(d):
    by_coord = defaultdict(list)
    for r in rows(d / "marginals.csv"):
        by_coord[r["coordinate"]].append(r)
    fig, axes = plt.subplots(1, len(by_coord), figsize=(5 * len(by_coord), 4))
    for ax, (coord, rs) in zip(axes, sorted(by_coord.items())):
        x = [float(r["x"]) for r in rs]
        for m in METHODS:
            ax.step(x, [float(r[m]) for r in rs], where="post", label=m)
        ax.set_title(f"marginal eCDF, coordinate {coord}")
        ax.legend()
    fig.tight_layout()
    fig.savefig(d / "marginals.png", dpi=120)


def plot_kde(d):
    surfaces = defaultdict(dict)
    for r in rows(d / "kde.csv"):
        surfaces[r["method"]][(float(r["x"]), float(r["y"]))] = float(r["density"])
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
    for ax, m in zip(axes, METHODS):
        s = surfaces[m]
        xs = sorted({p[0] for p in s})
        ys = sorted({p[1] for p in s})
        z = [[s[(x, y)] for x in xs] for y in ys]
        ax.contourf(xs, ys, z, levels=20)
        ax.set_title(f"density: {m}")
    fig.tight_layout()
    fig.savefig(d / "kde.png", dpi=120)


def plot_mesh(d):
    rs = rows(d / "mesh.csv")
    truth = [float(r["truth"]) for r in rs]
    fig, ax = plt.subplots(figsize=(5, 5))
    for m in ("ot", "cic"):
        ax.scatter(truth, [float(r[m]) for r in rs], s=2, alpha=0.4, label=m)
    ax.plot([0, 1], [0, 1], color="black", lw=0.8)
    ax.set_xlabel("true joint eCDF")
    ax.set_ylabel("estimated joint eCDF")
    ax.legend()
    fig.tight_layout()
    fig.savefig(d / "mesh.png", dpi=120)


def plot_quantiles(d):
    by_coord = defaultdict(list)
    for r in rows(d / "quantiles.csv"):
        by_coord[r["coordinate"]].append(r)
    fig, axes = plt.subplots(1, len(by_coord), figsize=(5 * len(by_coord), 4))
    for ax, (coord, rs) in zip(axes, sorted(by_coord.items())):
        q = [float(r["level"]) for r in rs]
        ax.plot(q, [float(r["treated"]) for r in rs], label="treated")
        ax.plot(q, [float(r["counterfactual"]) for r in rs], label="counterfactual")
        ax.set_title(f"quantiles, coordinate {coord}")
        ax.legend()
    fig.tight_layout()
    fig.savefig(d / "quantiles.png", dpi=120)


def plot_unit_effects(d):
    rs = rows(d / "unit_effects.csv")
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter([float(r["effect_ft"]) for r in rs], [float(r["effect_pt"]) for r in rs], s=6)
    ax.axhline(0, color="grey", lw=0.6)
    ax.axvline(0, color="grey", lw=0.6)
    ax.set_xlabel("effect on full-time employees")
    ax.set_ylabel("effect on part-time employees")
    fig.tight_layout()
    fig.savefig(d / "unit_effects.png", dpi=120)


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    d = Path(sys.argv[1])
    plots = {
        "marginals.csv": plot_marginals,
        "kde.csv": plot_kde,
        "mesh.csv": plot_mesh,
        "quantiles.csv": plot_quantiles,
        "table2.csv": plot_unit_effects,
    }
    done = 0
    for name, fn in plots.items():
        if (d / name).exists():
            fn(d)
            done += 1
    if not done:
        sys.exit(f"no plottable CSV files in {d}")


if __name__ == "__main__":
    main()
