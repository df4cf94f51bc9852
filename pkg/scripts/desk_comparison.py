"""Desk-scale comparison: every learner, several seeds, with a summary of the orderings.

Example::

    python3 scripts/desk_comparison.py --seeds 10 --actions 4000 --out runs/desk
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sgim_acts import analysis
from sgim_acts.core import Config
from sgim_acts.harness import eval_csv, run_all, strategy_csv
from sgim_acts.learners import ALGORITHMS
from sgim_acts.teachers import make_teachers


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON config (defaults otherwise)")
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--actions", type=int, default=4000)
    parser.add_argument("--algos", default=",".join(a for a in ALGORITHMS if a != "random"))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", help="directory for eval.csv and strategy.csv")
    args = parser.parse_args()

    cfg = Config.from_json(args.config) if args.config else Config()
    cfg = cfg.replace(total_actions=args.actions, eval_period=min(cfg.eval_period, args.actions))
    algos = args.algos.split(",")
    start = time.perf_counter()
    teachers = make_teachers(cfg, cache_dir=f"{args.out}/cache" if args.out else None)
    results = run_all(cfg, algos, range(cfg.seed, cfg.seed + args.seeds), teachers, jobs=args.jobs)
    print(f"{len(results)} runs in {time.perf_counter() - start:.1f} s")

    final = {k: analysis.final_errors(results, k) for k in ("err_all", "err_throw", "err_place")}
    print(f"{'algorithm':12s} {'all':>8s} {'throw':>8s} {'place':>8s}  sgim_acts wins")
    for a in algos:
        row = [np.mean(list(final[k][a].values())) for k in final]
        wins = ""
        if a != "sgim_acts" and "sgim_acts" in final["err_all"]:
            w, n = analysis.paired_wins(final["err_all"], "sgim_acts", a)
            wins = f"{w}/{n}"
        print(f"{a:12s} {row[0]:8.4f} {row[1]:8.4f} {row[2]:8.4f}  {wins}")

    if "sgim_acts" in algos:
        counts = analysis.strategy_counts(results)
        print("strategy counts:", dict(sorted(counts.items())))
        first, last = analysis.quarter_shares(results, lambda r: r.strategy.label == "intrinsic")
        print(f"intrinsic share, first vs last quarter: {first:.3f} -> {last:.3f}")
        first, last = analysis.quarter_shares(results, lambda r: r.goal_kind == "place")
        print(f"place-goal share, first vs last quarter: {first:.3f} -> {last:.3f}")

    if args.out:
        from pathlib import Path

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval.csv").write_text(eval_csv(results))
        (out / "strategy.csv").write_text(strategy_csv(results))


if __name__ == "__main__":
    main()
