"""Summarise a strategy.csv: strategy counts and per-quarter shares of strategies and goal kinds."""

from __future__ import annotations

import argparse
import csv
from collections import Counter, defaultdict


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("path", help="strategy.csv written by `sgim-acts run`")
    parser.add_argument("--bins", type=int, default=4, help="number of time bins per run")
    args = parser.parse_args()

    runs = defaultdict(list)
    with open(args.path, newline="") as fh:
        for row in csv.DictReader(fh):
            runs[row["run_id"]].append(row)

    total = Counter(row["strategy"] for rows in runs.values() for row in rows)
    print("episodes per strategy:", dict(sorted(total.items())))
    labels = sorted(total)
    share = [Counter() for _ in range(args.bins)]
    place = [0.0] * args.bins
    for rows in runs.values():
        rows.sort(key=lambda r: int(r["episode"]))
        for b in range(args.bins):
            chunk = rows[b * len(rows) // args.bins:(b + 1) * len(rows) // args.bins]
            if not chunk:
                continue
            for r in chunk:
                share[b][r["strategy"]] += 1 / len(chunk) / len(runs)
            place[b] += sum(r["goal_type"] == "place" for r in chunk) / len(chunk) / len(runs)
    print("bin " + " ".join(f"{s:>11s}" for s in labels) + "       place")
    for b in range(args.bins):
        print(f"{b:3d} " + " ".join(f"{share[b][s]:11.3f}" for s in labels) + f" {place[b]:11.3f}")


if __name__ == "__main__":
    main()
