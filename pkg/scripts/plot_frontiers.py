#!/usr/bin/env python3
"""Plot expected attack time vs. cost frontiers from a sweep CSV."""

import argparse
import csv
from collections import defaultdict


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv_path")
    parser.add_argument("--out", default="frontiers.png")
    parser.add_argument("--top", type=int, default=12,
                        help="plot only the N configurations with the fastest attacks")
    args = parser.parse_args()

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_config = defaultdict(list)
    with open(args.csv_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["expected_time"]:
                by_config[row["config_id"]].append(
                    (float(row["expected_time"]), float(row["expected_cost"]))
                )

    ranked = sorted(by_config.items(), key=lambda kv: min(t for t, _ in kv[1]))[: args.top]
    fig, ax = plt.subplots(figsize=(9, 6))
    for config_id, points in ranked:
        points.sort()
        ax.plot([t for t, _ in points], [c for _, c in points], "o-", label=config_id)
    ax.set_xlabel("expected attack time")
    ax.set_ylabel("expected attack cost")
    ax.set_title("Attacker trade-off frontiers per defense configuration")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out} ({len(ranked)} configurations)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
