"""Summaries of comparison runs: final errors, paired-seed wins, strategy and goal shares."""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Sequence

import numpy as np

from .harness import RunResult


def final_errors(results: Sequence[RunResult], key: str = "err_all") -> dict:
    """``{algorithm: {seed: error at the last evaluation}}``."""
    out: dict = defaultdict(dict)
    for r in results:
        if r.evals:
            out[r.algorithm][r.seed] = getattr(r.evals[-1], key)
    return dict(out)


def paired_wins(errors: dict, challenger: str, baseline: str) -> tuple[int, int]:
    """Seeds where ``challenger`` ends strictly below ``baseline``, and the number of shared seeds."""
    seeds = sorted(set(errors[challenger]) & set(errors[baseline]))
    wins = sum(errors[challenger][s] < errors[baseline][s] for s in seeds)
    return wins, len(seeds)


def strategy_counts(results: Sequence[RunResult], algorithm: str = "sgim_acts") -> Counter:
    c: Counter = Counter()
    for r in results:
        if r.algorithm == algorithm:
            c.update(rec.strategy.label for rec in r.records)
    return c


def quarter_shares(results: Sequence[RunResult], predicate, algorithm: str = "sgim_acts") -> tuple[float, float]:
    """Mean over runs of the share of episodes satisfying ``predicate`` in the first and last quarter."""
    first, last = [], []
    for r in results:
        if r.algorithm != algorithm or len(r.records) < 4:
            continue
        q = len(r.records) // 4
        first.append(np.mean([bool(predicate(rec)) for rec in r.records[:q]]))
        last.append(np.mean([bool(predicate(rec)) for rec in r.records[-q:]]))
    return float(np.mean(first)), float(np.mean(last))
