#!/usr/bin/env python3
"""Render a grid-search CSV (max_depth,learning_rate,mean_mae) as a heatmap."""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_grid(path):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["max_depth", "learning_rate", "mean_mae"]:
            sys.exit(f"{path}: expected header max_depth,learning_rate,mean_mae, got {header}")
        cells = [(int(d), float(r), float(m)) for d, r, m in reader]
    if not cells:
        sys.exit(f"{path}: no grid cells")
    depths = sorted({c[0] for c in cells})
    rates = sorted({c[1] for c in cells})
    grid = np.full((len(depths), len(rates)), np.nan)
    for d, r, m in cells:
        grid[depths.index(d), rates.index(r)] = m
    if np.isnan(grid).any():
        sys.exit(f"{path}: grid is not a full cartesian product")
    return depths, rates, grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("grid_csv")
    ap.add_argument("out_png")
    args = ap.parse_args()

    depths, rates, grid = load_grid(args.grid_csv)

    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(rates), 1.2 + 0.9 * len(depths)))
    im = ax.imshow(grid, cmap="viridis_r", aspect="auto")
    ax.set_xticks(range(len(rates)), [f"{r:g}" for r in rates])
    ax.set_yticks(range(len(depths)), [str(d) for d in depths])
    ax.set_xlabel("learning rate")
    ax.set_ylabel("max depth")
    ax.set_title("cross-validated MAE")

    best = np.unravel_index(np.nanargmin(grid), grid.shape)
    for i in range(len(depths)):
        for j in range(len(rates)):
            marker = " *" if (i, j) == best else ""
            ax.text(j, i, f"{grid[i, j]:.3f}{marker}", ha="center", va="center",
                    color="white" if grid[i, j] > np.nanmean(grid) else "black", fontsize=9)

    fig.colorbar(im, ax=ax, label="mean MAE")
    fig.tight_layout()
    fig.savefig(args.out_png, dpi=150)
    print(f"wrote {args.out_png} (best: depth={depths[best[0]]}, rate={rates[best[1]]:g})")


if __name__ == "__main__":
    main()
