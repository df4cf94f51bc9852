"""Shared vocabulary: configuration, outcomes, strategies, episodes and memory.

Outcomes live in a composite space made of two boxes: ``throw`` outcomes
``(x, h)`` (landing distance, apex height) and ``place`` outcomes ``(phi,)``
(final arm angle). Distances are normalised by the diagonal of the box the
outcomes belong to, so errors on both kinds are comparable and lie in [0, 1]
for in-box points.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

THROW = "throw"
PLACE = "place"
KINDS = (THROW, PLACE)

N_SEGMENTS = 7
N_PARAMS = 2 * N_SEGMENTS

INCOMPARABLE = 1.0


class ConfigError(ValueError):
    pass


class ParameterDomainError(ValueError):
    """Policy parameters outside the admissible box."""


class ModelColdError(LookupError):
    """No memorised outcome of the requested kind."""


@dataclass(frozen=True)
class Config:
    """Every tunable of the simulation, learners and harness.

    Any key absent from a JSON config takes the default below.
    """

    # policy parameter box
    a_max: float = 5.0
    t_min: float = 0.05
    t_max: float = 0.3
    # arm and ball
    arm_length: float = 1.0
    pivot_height: float = 1.0
    gravity: float = 9.81
    v_max: float = 0.01
    wall_x: float = 10.0
    paper_literal_h: bool = False
    # outcome boxes, one (low, high) pair per dimension
    throw_box: tuple = ((-15.0, 10.0), (0.0, 8.0))
    place_box: tuple = ((-math.pi, math.pi),)
    # interest map
    alpha_p: float = 1000.0
    g_max: int = 10
    delta: int = 10
    m_splits: int = 50
    p1: float = 0.05
    p2: float = 0.7
    p3: float = 0.25
    mode3_noise: float = 0.05
    kappa_intrinsic: float = 1.0
    kappa_social: float = 2.0
    progress_reference: str = "memory"  # "episode" | "memory": what the end-of-episode competence is measured on
    # exploration
    epsilon: float = 0.05
    nba_mimic: int = 5
    nba_optimise: int = 15
    rho_rand: float = 0.2
    simplex_step: float = 0.05
    # local inverse model
    knn_k: int = 8
    kernel_width_throw: float = 0.005
    kernel_width_place: float = 1e-4
    # teachers
    teacher1_actions: int = 4000
    teacher1_grid: tuple = (10, 10)
    teacher1_seed: int = 12345
    # protocol
    total_actions: int = 8000
    eval_period: int = 1000
    bench_throw_grid: tuple = (20, 10)
    bench_place: int = 50
    seed: int = 0
    n_seeds: int = 10

    def __post_init__(self):
        # JSON gives lists; keep the dataclass hashable and immutable
        for name in ("throw_box", "place_box", "teacher1_grid", "bench_throw_grid"):
            value = getattr(self, name)
            if name.endswith("box"):
                value = tuple(tuple(float(v) for v in pair) for pair in value)
            else:
                value = tuple(int(v) for v in value)
            object.__setattr__(self, name, value)
        self.validate()

    def validate(self) -> None:
        if abs(self.p1 + self.p2 + self.p3 - 1.0) > 1e-9:
            raise ConfigError(f"mode probabilities must sum to 1, got {self.p1 + self.p2 + self.p3!r}")
        if min(self.p1, self.p2, self.p3) < 0:
            raise ConfigError("mode probabilities must be non-negative")
        for name in ("nba_mimic", "nba_optimise", "total_actions", "eval_period",
                     "g_max", "delta", "m_splits", "knn_k", "teacher1_actions", "n_seeds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not (self.a_max > 0 and 0 < self.t_min < self.t_max):
            raise ConfigError("invalid policy parameter bounds")
        if self.progress_reference not in ("episode", "memory"):
            raise ConfigError("progress_reference must be 'episode' or 'memory'")
        if min(self.kappa_intrinsic, self.kappa_social) <= 0:
            raise ConfigError("strategy costs must be positive")
        if not 0.0 <= self.rho_rand <= 1.0:
            raise ConfigError("rho_rand must lie in [0, 1]")
        if min(self.kernel_width_throw, self.kernel_width_place) <= 0:
            raise ConfigError("kernel widths must be positive")
        for name in ("throw_box", "place_box"):
            for lo, hi in getattr(self, name):
                if not lo < hi:
                    raise ConfigError(f"{name} has an empty dimension ({lo}, {hi})")

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "Config":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes: Any) -> "Config":
        return replace(self, **changes)

    # derived quantities -------------------------------------------------
    @property
    def lower(self) -> np.ndarray:
        return np.array([-self.a_max, self.t_min] * N_SEGMENTS)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.a_max, self.t_max] * N_SEGMENTS)

    def box(self, kind: str) -> "OutcomeBox":
        return OutcomeBox(kind, self.throw_box if kind == THROW else self.place_box)

    def kernel_width(self, kind: str) -> float:
        return self.kernel_width_throw if kind == THROW else self.kernel_width_place


@dataclass(frozen=True)
class OutcomeBox:
    kind: str
    bounds: tuple

    @property
    def low(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def high(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def diagonal(self) -> float:
        return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounds))


@dataclass(frozen=True)
class Outcome:
    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown outcome kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"type": self.kind, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "Outcome":
        return cls(data["type"], tuple(float(v) for v in data["values"]))


def throw(x: float, h: float) -> Outcome:
    return Outcome(THROW, (float(x), float(h)))


def place(phi: float) -> Outcome:
    return Outcome(PLACE, (float(phi),))


def wrap_angle(phi: float) -> float:
    """Map an angle to [-pi, pi)."""
    wrapped = (phi + math.pi) % (2.0 * math.pi) - math.pi
    # float rounding can land exactly on +pi
    return -math.pi if wrapped >= math.pi else wrapped


_DIAGONALS: dict = {}


def _diagonal(kind: str, cfg: Config) -> float:
    key = (kind, cfg.throw_box, cfg.place_box)
    if key not in _DIAGONALS:
        _DIAGONALS[key] = cfg.box(kind).diagonal
    return _DIAGONALS[key]


def distance(a: Outcome, b: Outcome, cfg: Config) -> float:
    """Normalised distance between outcomes; 1.0 across kinds."""
    if a.kind != b.kind:
        return INCOMPARABLE
    return math.dist(a.values, b.values) / _diagonal(a.kind, cfg)


@dataclass(frozen=True)
class Strategy:
    kind: str  # "intrinsic" | "mimic" | "emulate"
    teacher: int | None = None

    def __post_init__(self):
        if self.kind not in ("intrinsic", "mimic", "emulate"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if (self.kind == "intrinsic") != (self.teacher is None):
            raise ValueError("social strategies need a teacher, intrinsic takes none")

    @property
    def social(self) -> bool:
        return self.kind != "intrinsic"

    @property
    def label(self) -> str:
        return self.kind if self.teacher is None else f"{self.kind}_t{self.teacher}"

    @classmethod
    def from_label(cls, label: str) -> "Strategy":
        if label == "intrinsic":
            return cls("intrinsic")
        kind, _, teacher = label.partition("_t")
        return cls(kind, int(teacher))

    def cost(self, cfg: Config) -> float:
        return cfg.kappa_social if self.social else cfg.kappa_intrinsic

    def __str__(self) -> str:
        return self.label


INTRINSIC = Strategy("intrinsic")
ALL_STRATEGIES = (INTRINSIC,) + tuple(
    Strategy(kind, t) for t in (1, 2, 3) for kind in ("mimic", "emulate")
)


def check_params(theta: np.ndarray, cfg: Config) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N_PARAMS,):
        raise ParameterDomainError(f"expected {N_PARAMS} parameters, got shape {theta.shape}")
    tol = 1e-12
    if np.any(theta < cfg.lower - tol) or np.any(theta > cfg.upper + tol) or not np.all(np.isfinite(theta)):
        raise ParameterDomainError(f"policy parameters out of bounds: {theta}")
    return theta


def clip_params(theta: np.ndarray, cfg: Config) -> np.ndarray:
    return np.clip(theta, cfg.lower, cfg.upper)


def random_params(rng: np.random.Generator, cfg: Config) -> np.ndarray:
    return rng.uniform(cfg.lower, cfg.upper)


@dataclass(frozen=True)
class Episode:
    theta: np.ndarray
    observed: tuple
    goal: Outcome | None
    strategy: Strategy | None
    tick: int

    def outcome(self, kind: str) -> Outcome | None:
        for o in self.observed:
            if o.kind == kind:
                return o
        return None


class EpisodicMemory:
    """Append-only store of executed policies and what they produced.

    Each outcome kind keeps a contiguous array of its values (with the row
    of the policy that produced it), which is what nearest-neighbour
    queries scan.
    """

    def __init__(self, cfg: Config, capacity: int = 1024):
        self.cfg = cfg
        self.episodes: list[Episode] = []
        self._thetas = np.empty((capacity, N_PARAMS))
        self._values = {k: np.empty((capacity, cfg.box(k).dim)) for k in KINDS}
        self._rows = {k: np.empty(capacity, dtype=np.int64) for k in KINDS}
        self._counts = {k: 0 for k in KINDS}
        self._scale = {k: 1.0 / cfg.box(k).diagonal for k in KINDS}

    def __len__(self) -> int:
        return len(self.episodes)

    @staticmethod
    def _grow(arr: np.ndarray, needed: int) -> np.ndarray:
        if needed <= len(arr):
            return arr
        out = np.empty((max(needed, 2 * len(arr)),) + arr.shape[1:], dtype=arr.dtype)
        out[: len(arr)] = arr
        return out

    def add(self, episode: Episode) -> None:
        row = len(self.episodes)
        self._thetas = self._grow(self._thetas, row + 1)
        self._thetas[row] = episode.theta
        for o in episode.observed:
            n = self._counts[o.kind]
            self._values[o.kind] = self._grow(self._values[o.kind], n + 1)
            self._rows[o.kind] = self._grow(self._rows[o.kind], n + 1)
            self._values[o.kind][n] = o.values
            self._rows[o.kind][n] = row
            self._counts[o.kind] = n + 1
        self.episodes.append(episode)

    def count(self, kind: str) -> int:
        return self._counts[kind]

    def values(self, kind: str) -> np.ndarray:
        return self._values[kind][: self._counts[kind]]

    def rows(self, kind: str) -> np.ndarray:
        return self._rows[kind][: self._counts[kind]]

    @property
    def thetas(self) -> np.ndarray:
        return self._thetas[: len(self.episodes)]

    def distances(self, goal: Outcome) -> np.ndarray:
        """Normalised distance from ``goal`` to every memorised outcome of its kind."""
        diff = self.values(goal.kind) - np.asarray(goal.values)
        return np.sqrt(np.einsum("ij,ij->i", diff, diff)) * self._scale[goal.kind]

    def nearest(self, goal: Outcome, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Indices (into the per-kind arrays) and distances of the k nearest outcomes.

        Ties are broken by insertion order, so results match a linear scan.
        """
        n = self._counts[goal.kind]
        if n == 0:
            raise ModelColdError(f"no {goal.kind} outcome in memory")
        d = self.distances(goal)
        k = min(k, n)
        if k == 1:
            i = int(np.argmin(d))
            return np.array([i]), d[[i]]
        idx = np.lexsort((np.arange(n), d))[:k]
        return idx, d[idx]

    def snapshot(self) -> "EpisodicMemory":
        """Independent copy, safe to hand to an evaluator."""
        other = EpisodicMemory(self.cfg, capacity=max(1, len(self.episodes)))
        for ep in self.episodes:
            other.add(ep)
        return other

    # persistence ---------------------------------------------------------
    def save(self, path: str | Path) -> None:
        records = [
            {
                "theta": ep.theta.tolist(),
                "observed": [o.to_dict() for o in ep.observed],
                "goal": ep.goal.to_dict() if ep.goal is not None else None,
                "strategy": ep.strategy.label if ep.strategy is not None else None,
                "tick": ep.tick,
            }
            for ep in self.episodes
        ]
        with open(path, "w") as fh:
            json.dump(records, fh)

    @classmethod
    def load(cls, path: str | Path, cfg: Config) -> "EpisodicMemory":
        with open(path) as fh:
            records = json.load(fh)
        memory = cls(cfg, capacity=max(1, len(records)))
        for r in records:
            memory.add(
                Episode(
                    theta=np.asarray(r["theta"], dtype=float),
                    observed=tuple(Outcome.from_dict(o) for o in r["observed"]),
                    goal=Outcome.from_dict(r["goal"]) if r.get("goal") else None,
                    strategy=Strategy.from_label(r["strategy"]) if r.get("strategy") else None,
                    tick=int(r["tick"]),
                )
            )
        return memory

