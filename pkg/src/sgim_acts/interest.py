"""Competence progress, the region partition of outcome space, and goal/strategy selection.

Each outcome kind has its own root box, recursively split into leaves. A
leaf keeps, for every strategy, an ordered ledger of ``(point, progress)``
records; the strategy's interest in that leaf is the windowed mean progress
divided by the strategy's cost.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Config, Outcome, Strategy

log = logging.getLogger(__name__)

_BELOW_ONE = math.nextafter(1.0, 0.0)


def progress(gamma1: float, gamma2: float, n_actions: int, alpha_p: float) -> float:
    """Competence progress over an episode, squashed into (-1, 1).

    Positive exactly when competence improved; ``tanh`` keeps the sign that
    an even squashing function would lose. Large arguments would round to
    exactly +-1 in floating point, so the result is held just inside.
    """
    if n_actions < 1:
        raise ValueError("an episode needs at least one action")
    p = math.tanh(alpha_p * (gamma2 - gamma1) / n_actions)
    return max(-_BELOW_ONE, min(_BELOW_ONE, p))


def windowed_interest(progress_values: Sequence[float], delta: int, kappa: float) -> float:
    if len(progress_values) == 0:
        return 0.0
    window = progress_values[-delta:]
    return float(sum(window) / len(window)) / kappa


@dataclass
class Entry:
    point: tuple
    progress: float
    competence: float | None = None  # set for goals only


@dataclass(eq=False)
class Region:
    id: int
    kind: str
    low: np.ndarray
    high: np.ndarray
    ledgers: list
    interest: np.ndarray
    split_dim: int | None = None
    split_value: float | None = None
    children: tuple | None = None
    parent: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def width(self) -> np.ndarray:
        return self.high - self.low

    @property
    def volume(self) -> float:
        return float(np.prod(self.width))

    def child_for(self, point: Sequence[float]) -> "Region":
        return self.children[0] if point[self.split_dim] < self.split_value else self.children[1]


@dataclass(frozen=True)
class SplitCandidate:
    dim: int
    value: float


def draw_split_candidates(low: np.ndarray, high: np.ndarray, m: int, rng: np.random.Generator) -> list:
    """``m`` random (dimension, threshold) pairs, thresholds strictly inside the box."""
    out = []
    dim = len(low)
    for _ in range(m):
        j = int(rng.integers(dim))
        v = float(rng.uniform(low[j], high[j]))
        if not low[j] < v < high[j]:
            v = 0.5 * (low[j] + high[j])
        out.append(SplitCandidate(j, v))
    return out


def split_quality(points: np.ndarray, progs: np.ndarray, cand: SplitCandidate, delta: int, kappa: float) -> float:
    left = points[:, cand.dim] < cand.value
    n_left = int(left.sum())
    n_right = len(progs) - n_left
    if n_left == 0 or n_right == 0:
        return 0.0
    gap = windowed_interest(progs[left].tolist(), delta, kappa) - windowed_interest(progs[~left].tolist(), delta, kappa)
    return n_left * n_right * abs(gap)


@dataclass
class Selection:
    goal: Outcome
    strategy: Strategy
    mode: int
    region: int


class InterestMap:
    """Partition of the outcome space with per-(region, strategy) interest."""

    def __init__(self, cfg: Config, strategies: Sequence[Strategy], kinds: Sequence[str] = ("throw", "place")):
        self.cfg = cfg
        self.strategies = tuple(strategies)
        self.kappas = np.array([s.cost(cfg) for s in self.strategies])
        self.index = {s: i for i, s in enumerate(self.strategies)}
        self.regions: list[Region] = []
        self.roots = {kind: self._new_region(kind, cfg.box(kind).low, cfg.box(kind).high, None) for kind in kinds}
        self.leaves: list[Region] = list(self.roots.values())
        self.n_splits = 0

    def _new_region(self, kind: str, low: np.ndarray, high: np.ndarray, parent: int | None) -> Region:
        r = Region(
            id=len(self.regions),
            kind=kind,
            low=np.array(low, dtype=float),
            high=np.array(high, dtype=float),
            ledgers=[[] for _ in self.strategies],
            interest=np.zeros(len(self.strategies)),
            parent=parent,
        )
        self.regions.append(r)
        return r

    # queries -------------------------------------------------------------
    def clamp(self, kind: str, point: Sequence[float]) -> tuple:
        root = self.roots[kind]
        clamped = tuple(min(max(float(p), lo), hi) for p, lo, hi in zip(point, root.low, root.high))
        if clamped != tuple(point):
            log.debug("outcome %s outside the %s box, clamped to %s", tuple(point), kind, clamped)
        return clamped

    def locate(self, kind: str, point: Sequence[float]) -> Region:
        region = self.roots[kind]
        point = self.clamp(kind, point)
        while not region.is_leaf:
            region = region.child_for(point)
        return region

    def interest(self, region: Region, strategy: Strategy) -> float:
        return float(region.interest[self.index[strategy]])

    def _refresh(self, region: Region, s: int) -> None:
        region.interest[s] = windowed_interest(
            [e.progress for e in region.ledgers[s]], self.cfg.delta, self.kappas[s]
        )

    def leaf_count(self, kind: str) -> int:
        return sum(1 for leaf in self.leaves if leaf.kind == kind)

    # updates -------------------------------------------------------------
    def add(self, kind: str, point: Sequence[float], prog: float, strategy: Strategy,
            rng: np.random.Generator, competence: float | None = None) -> Region:
        s = self.index[strategy]
        point = self.clamp(kind, point)
        leaf = self.locate(kind, point)
        leaf.ledgers[s].append(Entry(point, float(prog), competence))
        self._refresh(leaf, s)
        if len(leaf.ledgers[s]) > self.cfg.g_max:
            self.split(leaf, strategy, rng)
        return leaf

    def update(self, goal: Outcome, goal_progress: float, observed: Sequence[Outcome], strategy: Strategy,
               rng: np.random.Generator, goal_competence: float | None = None,
               observed_progress: float | None = None) -> None:
        """File an episode: each observed outcome, then the goal, under ``strategy``."""
        prog = goal_progress if observed_progress is None else observed_progress
        for o in observed:
            if o.kind in self.roots:
                self.add(o.kind, o.values, prog, strategy, rng)
        if goal.kind in self.roots:
            self.add(goal.kind, goal.values, goal_progress, strategy, rng, competence=goal_competence)

    def choose_split(self, region: Region, strategy: Strategy, rng: np.random.Generator) -> tuple[SplitCandidate, float]:
        s = self.index[strategy]
        entries = region.ledgers[s]
        points = np.array([e.point for e in entries], dtype=float)
        progs = np.array([e.progress for e in entries], dtype=float)
        best, best_q = None, -1.0
        for cand in draw_split_candidates(region.low, region.high, self.cfg.m_splits, rng):
            q = split_quality(points, progs, cand, self.cfg.delta, self.kappas[s])
            if q > best_q:
                best, best_q = cand, q
        return best, best_q

    def split(self, region: Region, strategy: Strategy, rng: np.random.Generator) -> tuple | None:
        """Split a leaf in two along the best of ``m_splits`` random cuts.

        Every strategy's ledger is re-routed to the children. A child still
        holding more than ``g_max`` records for some strategy keeps only the
        newest ``g_max`` of them; the interest window never looks further back.
        """
        g_max = self.cfg.g_max
        if np.all(region.width <= 1e-12 * np.maximum(1.0, np.abs(region.high))):
            log.info("region %d is degenerate; truncating instead of splitting", region.id)
            for s in range(len(self.strategies)):
                del region.ledgers[s][:-g_max]
                self._refresh(region, s)
            return None
        cand, _ = self.choose_split(region, strategy, rng)
        j, v = cand.dim, cand.value
        high1 = region.high.copy()
        high1[j] = v
        low2 = region.low.copy()
        low2[j] = v
        c1 = self._new_region(region.kind, region.low, high1, region.id)
        c2 = self._new_region(region.kind, low2, region.high, region.id)
        region.split_dim, region.split_value, region.children = j, v, (c1, c2)
        for s, ledger in enumerate(region.ledgers):
            for e in ledger:
                (c1 if e.point[j] < v else c2).ledgers[s].append(e)
        region.ledgers = [[] for _ in self.strategies]
        region.interest = np.zeros(len(self.strategies))
        for child in (c1, c2):
            for s in range(len(self.strategies)):
                if len(child.ledgers[s]) > g_max:
                    del child.ledgers[s][:-g_max]
                self._refresh(child, s)
        i = self.leaves.index(region)
        self.leaves[i:i + 1] = [c1, c2]
        self.n_splits += 1
        return c1, c2

    # selection -----------------------------------------------------------
    def pair_probabilities(self) -> np.ndarray:
        """Selection probability of every (leaf, strategy) pair, shape (leaves, strategies)."""
        interest = np.array([leaf.interest for leaf in self.leaves])
        shifted = interest - interest.min()
        total = shifted.sum()
        if not total > 0.0:
            return np.full(interest.shape, 1.0 / interest.size)
        return shifted / total

    def _draw_pair(self, rng: np.random.Generator) -> tuple[Region, Strategy]:
        p = self.pair_probabilities().ravel()
        flat = int(np.searchsorted(np.cumsum(p), rng.random() * p.sum(), side="right"))
        flat = min(flat, p.size - 1)
        n_s = len(self.strategies)
        return self.leaves[flat // n_s], self.strategies[flat % n_s]

    def select(self, rng: np.random.Generator) -> Selection:
        cfg = self.cfg
        u = rng.random()
        if u < cfg.p1:
            strategy = self.strategies[int(rng.integers(len(self.strategies)))]
            kinds = list(self.roots)
            counts = np.array([self.leaf_count(k) for k in kinds], dtype=float)
            kind = kinds[min(int(np.searchsorted(np.cumsum(counts), rng.random() * counts.sum(), side="right")), len(kinds) - 1)]
            root = self.roots[kind]
            goal = Outcome(kind, tuple(rng.uniform(root.low, root.high).tolist()))
            return Selection(goal, strategy, 1, self.locate(kind, goal.values).id)

        leaf, strategy = self._draw_pair(rng)
        if u < cfg.p1 + cfg.p2:
            goal = Outcome(leaf.kind, tuple(rng.uniform(leaf.low, leaf.high).tolist()))
            return Selection(goal, strategy, 2, leaf.id)

        worst = None
        for ledger in leaf.ledgers:
            for e in ledger:
                if e.competence is not None and (worst is None or e.competence < worst.competence):
                    worst = e
        if worst is None:
            values = rng.uniform(leaf.low, leaf.high)
        else:
            noise = rng.uniform(-1.0, 1.0, size=len(leaf.low)) * cfg.mode3_noise * leaf.width
            values = np.clip(np.asarray(worst.point) + noise, leaf.low, leaf.high)
        goal = Outcome(leaf.kind, tuple(values.tolist()))
        return Selection(goal, strategy, 3, leaf.id)

    # export ----------------------------------------------------------------
    def to_dict(self) -> dict:
        def dump(r: Region) -> dict:
            out = {
                "id": r.id,
                "kind": r.kind,
                "low": r.low.tolist(),
                "high": r.high.tolist(),
            }
            if r.is_leaf:
                out["ledger_sizes"] = {s.label: len(r.ledgers[i]) for i, s in enumerate(self.strategies)}
                out["interest"] = {s.label: float(r.interest[i]) for i, s in enumerate(self.strategies)}
            else:
                out["split"] = {"dim": r.split_dim, "value": r.split_value}
                out["children"] = [dump(c) for c in r.children]
            return out

        return {"strategies": [s.label for s in self.strategies],
                "roots": {kind: dump(root) for kind, root in self.roots.items()}}
