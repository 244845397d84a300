#!/usr/bin/env python3
"""Plot predicted vs actual cost from a scatter CSV (actual,predicted,group)."""

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scatter_csv")
    ap.add_argument("out_png")
    args = ap.parse_args()

    by_group = defaultdict(lambda: ([], []))
    with open(args.scatter_csv, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["actual", "predicted", "group"]:
            sys.exit(f"{args.scatter_csv}: expected header actual,predicted,group, got {header}")
        for actual, predicted, group in reader:
            xs, ys = by_group[group]
            xs.append(float(actual))
            ys.append(float(predicted))
    if not by_group:
        sys.exit(f"{args.scatter_csv}: no rows")

    actual = np.concatenate([xs for xs, _ in by_group.values()])
    predicted = np.concatenate([ys for _, ys in by_group.values()])
    mae = np.mean(np.abs(actual - predicted))
    mape = 100.0 * np.mean(np.abs(actual - predicted) / np.abs(actual))

    fig, ax = plt.subplots(figsize=(6, 6))
    for group, (xs, ys) in sorted(by_group.items()):
        ax.scatter(xs, ys, s=14, alpha=0.6, label=group)
    lo = min(actual.min(), predicted.min())
    hi = max(actual.max(), predicted.max())
    pad = 0.05 * (hi - lo if hi > lo else 1.0)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], "k--", linewidth=1, label="ideal")
    ax.set_xlim(lo - pad, hi + pad)
    ax.set_ylim(lo - pad, hi + pad)
    ax.set_xlabel("actual cost")
    ax.set_ylabel("predicted cost")
    ax.set_title(f"test predictions (MAE {mae:.3f}, MAPE {mape:.1f}%)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out_png, dpi=150)
    print(f"wrote {args.out_png} ({len(actual)} points)")


if __name__ == "__main__":
    main()
