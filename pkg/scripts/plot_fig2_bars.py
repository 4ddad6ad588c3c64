"""Bar chart of simulated outcome frequencies against quantum predictions.

Reads the CSV written by ``pbr-ions simulate --out run.json`` (run.csv).
Needs matplotlib.
"""

import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path")
    parser.add_argument("--save", default="fig2_bars.png")
    args = parser.parse_args()

    rows = defaultdict(list)
    with open(args.csv_path) as fh:
        for row in csv.DictReader(fh):
            rows[row["input"]].append(row)

    fig, axes = plt.subplots(1, len(rows), figsize=(3 * len(rows), 3), sharey=True)
    for ax, (label, outcomes) in zip(axes, rows.items()):
        x = range(len(outcomes))
        ax.bar(x, [float(r["quantum_probability"]) for r in outcomes], color="0.75", label="quantum")
        ax.errorbar(x, [float(r["frequency"]) for r in outcomes], yerr=[float(r["error"]) for r in outcomes],
                    fmt="_", color="red", markersize=14, label="simulated")
        ax.set_xticks(list(x), [r["outcome"] for r in outcomes])
        ax.set_title(f"input {label}")
    axes[0].set_ylabel("probability")
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.save, dpi=150)
    print(f"wrote {args.save}")


if __name__ == "__main__":
    main()
