"""Benchmark evaluation and the comparison protocol.

A run is one (algorithm, seed) pair. It learns up to the action budget and
is evaluated on a fixed benchmark every ``eval_period`` actions. Evaluation
executes policies on the simulator but never writes to the learner's memory.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import PLACE, THROW, Config, EpisodicMemory, ModelColdError, Outcome, distance
from .learners import ALGORITHMS, Learner, strategies_for
from .physics import execute_policy
from .regression import LocalModel
from .teachers import Teacher, make_teachers

log = logging.getLogger(__name__)

EVAL_HEADER = ("run_id", "algorithm", "seed", "actions", "err_all", "err_throw", "err_place")
STRATEGY_HEADER = ("run_id", "episode", "strategy", "teacher", "goal_type", "region_id", "progress")
OUT_ENV = "SGIM_ACTS_OUT"


@dataclass(frozen=True)
class Benchmark:
    goals: tuple

    @classmethod
    def default(cls, cfg: Config) -> "Benchmark":
        """Cell centres of a regular grid over each outcome box."""
        nx, nh = cfg.bench_throw_grid
        (x_lo, x_hi), (h_lo, h_hi) = cfg.throw_box
        xs = x_lo + (np.arange(nx) + 0.5) * (x_hi - x_lo) / nx
        hs = h_lo + (np.arange(nh) + 0.5) * (h_hi - h_lo) / nh
        goals = [Outcome(THROW, (float(x), float(h))) for x in xs for h in hs]
        (p_lo, p_hi), = cfg.place_box
        ps = p_lo + (np.arange(cfg.bench_place) + 0.5) * (p_hi - p_lo) / cfg.bench_place
        goals += [Outcome(PLACE, (float(p),)) for p in ps]
        return cls(tuple(goals))


@dataclass
class EvalRecord:
    run_id: str
    algorithm: str
    seed: int
    actions: int
    err_all: float
    err_throw: float
    err_place: float

    def row(self) -> list:
        return [self.run_id, self.algorithm, self.seed, self.actions,
                f"{self.err_all:.10f}", f"{self.err_throw:.10f}", f"{self.err_place:.10f}"]


def goal_errors(memory: EpisodicMemory, benchmark: Benchmark, cfg: Config) -> np.ndarray:
    """Error of the inverse model on each benchmark goal; 1.0 when nothing of the kind is known."""
    model = LocalModel(memory, cfg)
    errors = np.empty(len(benchmark.goals))
    for i, goal in enumerate(benchmark.goals):
        try:
            theta = model.inverse_lookup(goal)
        except ModelColdError:
            errors[i] = 1.0
            continue
        reached = [o for o in execute_policy(theta, cfg) if o.kind == goal.kind]
        errors[i] = min((distance(goal, o, cfg) for o in reached), default=1.0)
    return errors


def evaluate(memory: EpisodicMemory, benchmark: Benchmark, cfg: Config) -> dict:
    """Mean errors overall and per kind; overall is the mean of the two kinds."""
    errors = goal_errors(memory, benchmark, cfg)
    kinds = np.array([g.kind for g in benchmark.goals])
    err_throw = float(errors[kinds == THROW].mean()) if np.any(kinds == THROW) else math.nan
    err_place = float(errors[kinds == PLACE].mean()) if np.any(kinds == PLACE) else math.nan
    parts = [e for e in (err_throw, err_place) if not math.isnan(e)]
    return {"err_all": float(np.mean(parts)), "err_throw": err_throw, "err_place": err_place}


@dataclass
class RunResult:
    run_id: str
    algorithm: str
    seed: int
    evals: list
    records: list = field(default_factory=list)
    partition: dict | None = None
    memory: EpisodicMemory | None = None

    @property
    def n_actions(self) -> int:
        return len(self.memory) if self.memory is not None else 0


def run_id(algorithm: str, seed: int) -> str:
    return f"{algorithm}-s{seed}"


def run_single(algorithm: str, seed: int, cfg: Config, teachers: dict | None, benchmark: Benchmark | None = None,
               keep_memory: bool = False) -> RunResult:
    benchmark = benchmark or Benchmark.default(cfg)
    rid = run_id(algorithm, seed)
    evals: list[EvalRecord] = []

    def on_eval(tick: int, memory: EpisodicMemory) -> None:
        errs = evaluate(memory, benchmark, cfg)
        evals.append(EvalRecord(rid, algorithm, seed, tick, **errs))

    learner = Learner(algorithm, cfg, seed, teachers=teachers, on_eval=on_eval).run()
    return RunResult(
        run_id=rid,
        algorithm=algorithm,
        seed=seed,
        evals=evals,
        records=learner.records,
        partition=learner.imap.to_dict() if learner.imap is not None else None,
        memory=learner.memory if keep_memory else None,
    )


def _run_job(args: tuple) -> RunResult:
    algorithm, seed, cfg, teachers, keep_memory = args
    return run_single(algorithm, seed, cfg, teachers, keep_memory=keep_memory)


def run_all(cfg: Config, algorithms: Sequence[str], seeds: Iterable[int], teachers: dict | None,
            jobs: int = 1, keep_memory: bool = False) -> list[RunResult]:
    """Every (algorithm, seed) run, in a fixed order regardless of ``jobs``."""
    for a in algorithms:
        strategies_for(a)
    tasks = [(a, s, cfg, teachers, keep_memory) for a in algorithms for s in seeds]
    if jobs <= 1:
        return [_run_job(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, tasks))


def eval_csv(results: Sequence[RunResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVAL_HEADER)
    for r in results:
        for e in r.evals:
            w.writerow(e.row())
    return buf.getvalue()


def strategy_csv(results: Sequence[RunResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STRATEGY_HEADER)
    for r in results:
        if r.algorithm != "sgim_acts":
            continue
        for rec in r.records:
            w.writerow([r.run_id, rec.episode, rec.strategy.label,
                        "" if rec.strategy.teacher is None else rec.strategy.teacher,
                        rec.goal_kind, rec.region, f"{rec.progress:.10f}"])
    return buf.getvalue()


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "runs"))


def run_experiment(cfg: Config, algorithms: Sequence[str] = ALGORITHMS, seeds: Iterable[int] | None = None,
                   out_dir: str | Path | None = None, jobs: int = 1, cache_dir: str | Path | None = None,
                   save_memory: bool = False) -> dict:
    """Run the comparison and write eval.csv, strategy.csv, partitions and a manifest.

    Returns the paths written, keyed by role.
    """
    out = Path(out_dir) if out_dir is not None else default_out_dir()
    seeds = list(range(cfg.seed, cfg.seed + cfg.n_seeds)) if seeds is None else list(seeds)
    needs_teachers = any(s.social for a in algorithms for s in strategies_for(a))
    teachers = make_teachers(cfg, cache_dir if cache_dir is not None else out / "cache") if needs_teachers else None
    results = run_all(cfg, algorithms, seeds, teachers, jobs=jobs, keep_memory=save_memory)

    out.mkdir(parents=True, exist_ok=True)
    paths = {"eval": out / "eval.csv", "strategy": out / "strategy.csv", "manifest": out / "manifest.json"}
    paths["eval"].write_text(eval_csv(results))
    paths["strategy"].write_text(strategy_csv(results))
    part_dir = out / "partitions"
    part_dir.mkdir(exist_ok=True)
    for r in results:
        if r.partition is not None:
            p = part_dir / f"{r.run_id}.json"
            p.write_text(json.dumps(r.partition))
        if save_memory and r.memory is not None:
            mem_dir = out / "memory"
            mem_dir.mkdir(exist_ok=True)
            r.memory.save(mem_dir / f"{r.run_id}.json")
    manifest = {
        "config": cfg.to_dict(),
        "algorithms": list(algorithms),
        "seeds": seeds,
        "runs": [
            {
                "run_id": r.run_id,
                "algorithm": r.algorithm,
                "seed": r.seed,
                "episodes": len(r.records),
                "episode_actions": sum(rec.n_actions for rec in r.records),
            }
            for r in results
        ],
    }
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return paths
