"""Simulated teachers.

1. a thrower whose demonstrations come from an offline intrinsically
   motivated learner;
2. a placer that computes an exact zero-velocity policy for any angle in
   its range;
3. the same placer, seen through a correspondence problem: the learner reads
   the accelerations of the last two segments with the wrong sign.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import N_PARAMS, N_SEGMENTS, PLACE, THROW, Config, EpisodicMemory, Outcome, distance, place
from .exploration import demo_to_params

log = logging.getLogger(__name__)

PLACER_PAIRS = 3  # segments 1-6 as three accelerate/decelerate pairs, segment 7 idle


def placer_range(cfg: Config) -> float:
    return PLACER_PAIRS * cfg.a_max * cfg.t_max ** 2


def teacher2_place_policy(phi_target: float, cfg: Config) -> np.ndarray:
    """Bang-bang policy ending at ``phi_target`` with exactly zero velocity.

    Each of the three pairs runs ``+a`` then ``-a`` for ``t_max`` and turns
    the arm by ``a t_max^2``; targets beyond the reachable range are clamped.
    """
    reach = placer_range(cfg)
    if abs(phi_target) > reach:
        log.info("placing target %.4f rad out of range, clamped to %.4f", phi_target, math.copysign(reach, phi_target))
        phi_target = math.copysign(reach, phi_target)
    a = phi_target / (PLACER_PAIRS * cfg.t_max ** 2)
    theta = np.full(N_PARAMS, cfg.t_max)
    for pair in range(PLACER_PAIRS):
        theta[4 * pair] = a
        theta[4 * pair + 2] = -a
    theta[2 * (N_SEGMENTS - 1)] = 0.0
    return theta


@dataclass(frozen=True)
class Teacher:
    id: int
    sign_flipped: bool = False
    thetas: np.ndarray | None = None     # teacher 1 dataset
    outcomes: tuple | None = None

    @property
    def is_placer(self) -> bool:
        return self.thetas is None

    def true_demo(self, goal: Outcome, cfg: Config) -> tuple[np.ndarray, Outcome]:
        if self.is_placer:
            target = goal.values[0] if goal.kind == PLACE else 0.0
            target = max(-placer_range(cfg), min(placer_range(cfg), target))
            return teacher2_place_policy(target, cfg), place(target)
        # argmin over the dataset; cross-kind goals are all at distance 1, so the first demo wins
        d = [distance(goal, o, cfg) for o in self.outcomes]
        i = int(np.argmin(d))
        return self.thetas[i].copy(), self.outcomes[i]

    def request_demo(self, goal: Outcome, cfg: Config) -> tuple[np.ndarray, Outcome]:
        """Policy as the learner perceives it, and the outcome the teacher demonstrated."""
        theta, tau_d = self.true_demo(goal, cfg)
        return demo_to_params(theta, self.sign_flipped), tau_d


def grid_filter(memory: EpisodicMemory, cfg: Config) -> tuple[np.ndarray, tuple]:
    """Per cell of a grid over the throw box, the memorised throw closest to the centre."""
    nx, nh = cfg.teacher1_grid
    (x_lo, x_hi), (h_lo, h_hi) = cfg.throw_box
    dx, dh = (x_hi - x_lo) / nx, (h_hi - h_lo) / nh
    half_diag = 0.5 * math.hypot(dx, dh)
    values = memory.values(THROW)
    rows = memory.rows(THROW)
    thetas, outcomes = [], []
    for i in range(nx):
        for j in range(nh):
            centre = np.array([x_lo + (i + 0.5) * dx, h_lo + (j + 0.5) * dh])
            if len(values) == 0:
                continue
            d = np.hypot(values[:, 0] - centre[0], values[:, 1] - centre[1])
            k = int(np.argmin(d))
            if d[k] <= half_diag:
                thetas.append(memory.thetas[rows[k]].copy())
                outcomes.append(Outcome(THROW, tuple(values[k].tolist())))
    return np.array(thetas).reshape(-1, N_PARAMS), tuple(outcomes)


def build_teacher1_demoset(cfg: Config, seed: int | None = None) -> tuple[np.ndarray, tuple]:
    """Run an offline intrinsically motivated thrower and keep one demo per grid cell."""
    from .learners import make_learner

    seed = cfg.teacher1_seed if seed is None else seed
    learner = make_learner("sagg_riac", cfg.replace(total_actions=cfg.teacher1_actions), seed, teachers=None)
    learner.run()
    thetas, outcomes = grid_filter(learner.memory, cfg)
    if len(outcomes) == 0:
        raise RuntimeError("teacher 1 pre-run produced no throw inside the grid")
    return thetas, outcomes


def teacher1_cache_key(cfg: Config) -> str:
    relevant = {k: v for k, v in cfg.to_dict().items() if k not in ("total_actions", "eval_period", "seed", "n_seeds",
                                                                     "bench_throw_grid", "bench_place")}
    blob = json.dumps(relevant, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_demoset(path: str | Path, thetas: np.ndarray, outcomes: tuple) -> None:
    records = [{"theta": t.tolist(), "outcome": o.to_dict()} for t, o in zip(thetas, outcomes)]
    with open(path, "w") as fh:
        json.dump(records, fh)


def load_demoset(path: str | Path) -> tuple[np.ndarray, tuple]:
    with open(path) as fh:
        records = json.load(fh)
    thetas = np.array([r["theta"] for r in records], dtype=float).reshape(-1, N_PARAMS)
    outcomes = tuple(Outcome.from_dict(r["outcome"]) for r in records)
    return thetas, outcomes


def teacher1_demoset(cfg: Config, cache_dir: str | Path | None = None, rebuild: bool = False) -> tuple[np.ndarray, tuple]:
    """Teacher 1's dataset, read from ``cache_dir`` when a matching cache exists."""
    if cache_dir is None:
        return build_teacher1_demoset(cfg)
    path = Path(cache_dir) / f"teacher1_{teacher1_cache_key(cfg)}.json"
    if path.exists() and not rebuild:
        return load_demoset(path)
    thetas, outcomes = build_teacher1_demoset(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_demoset(path, thetas, outcomes)
    return thetas, outcomes


def make_teachers(cfg: Config, cache_dir: str | Path | None = None, demoset: tuple | None = None) -> dict[int, Teacher]:
    thetas, outcomes = demoset if demoset is not None else teacher1_demoset(cfg, cache_dir)
    return {
        1: Teacher(1, thetas=thetas, outcomes=outcomes),
        2: Teacher(2),
        3: Teacher(3, sign_flipped=True),
    }
