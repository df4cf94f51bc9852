"""The compared learners, all driven by the same episode loop.

``random`` draws policies uniformly. The others pick a goal and a strategy
from an interest map and run one episode of that strategy:

* ``sagg_riac``: the intrinsic strategy only;
* ``mimic_tK`` / ``emulate_tK``: one fixed social strategy with teacher K;
* ``sgim_acts``: all seven strategies, chosen actively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import ALL_STRATEGIES, INTRINSIC, Config, EpisodicMemory, Strategy, random_params
from .exploration import Executor, goal_directed_optimisation, goal_error, mimic_policy
from .interest import InterestMap, progress
from .regression import LocalModel
from .teachers import Teacher

SOCIAL_ALGORITHMS = tuple(s.label for s in ALL_STRATEGIES if s.social)
ALGORITHMS = ("random", "sagg_riac") + SOCIAL_ALGORITHMS + ("sgim_acts",)


@dataclass
class EpisodeRecord:
    episode: int
    strategy: Strategy
    mode: int
    goal_kind: str
    target_kind: str
    region: int
    gamma1: float
    gamma2: float
    goal_gamma1: float
    goal_gamma2: float
    progress: float
    n_actions: int
    tick: int


def strategies_for(algorithm: str) -> tuple:
    if algorithm == "sagg_riac":
        return (INTRINSIC,)
    if algorithm == "sgim_acts":
        return ALL_STRATEGIES
    if algorithm in SOCIAL_ALGORITHMS:
        return (Strategy.from_label(algorithm),)
    if algorithm == "random":
        return ()
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


class Learner:
    def __init__(
        self,
        algorithm: str,
        cfg: Config,
        seed: int,
        teachers: Mapping[int, Teacher] | None = None,
        strategies: tuple | None = None,
        on_eval: Callable[[int, EpisodicMemory], None] | None = None,
    ):
        self.algorithm = algorithm
        self.cfg = cfg
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.strategies = strategies_for(algorithm) if strategies is None else tuple(strategies)
        needed = {s.teacher for s in self.strategies if s.social}
        missing = needed - set(teachers or {})
        if missing:
            raise ValueError(f"{algorithm} needs teachers {sorted(missing)}")
        self.teachers = teachers or {}
        self.memory = EpisodicMemory(cfg, capacity=cfg.total_actions + 1)
        self.model = LocalModel(self.memory, cfg)
        self.on_eval = on_eval
        self.executor = Executor(self.memory, cfg, budget=cfg.total_actions, on_action=self._after_action)
        self.imap = InterestMap(cfg, self.strategies) if self.strategies else None
        self.records: list[EpisodeRecord] = []

    def _after_action(self, tick: int) -> None:
        if self.on_eval is not None and tick % self.cfg.eval_period == 0:
            self.on_eval(tick, self.memory)

    @property
    def actions(self) -> int:
        return self.executor.tick

    def run(self) -> "Learner":
        while self.executor.remaining > 0:
            self.step()
        return self

    def step(self) -> list:
        if self.imap is None:
            return self.step_random()
        return self.step_interest()

    def step_random(self) -> list:
        n = min(self.cfg.nba_optimise, self.executor.remaining)
        return [self.executor(random_params(self.rng, self.cfg), None, None) for _ in range(n)]

    def step_interest(self) -> list:
        """One episode: select (goal, strategy), act, measure progress, update the map."""
        cfg, rng = self.cfg, self.rng
        sel = self.imap.select(rng)
        strategy, goal = sel.strategy, sel.goal
        if strategy.social:
            theta_obs, target = self.teachers[strategy.teacher].request_demo(goal, cfg)
        else:
            target = goal
        gamma1 = self.model.competence(target)
        goal_gamma1 = self.model.competence(goal)

        if strategy.kind == "mimic":
            n = min(cfg.nba_mimic, self.executor.remaining)
            episodes = mimic_policy(theta_obs, n, rng, self.executor, cfg.epsilon, target, strategy)
        else:
            n = min(cfg.nba_optimise, self.executor.remaining)
            episodes = goal_directed_optimisation(target, self.model, n, rng, self.executor, strategy)

        gamma2 = -min(goal_error(target, ep, cfg) for ep in episodes)
        if cfg.progress_reference == "memory":
            gamma2 = max(gamma1, gamma2)
        prog = progress(gamma1, gamma2, len(episodes), cfg.alpha_p)
        observed = [o for ep in episodes for o in ep.observed]
        self.imap.update(target, prog, observed, strategy, rng, goal_competence=gamma2)
        self.records.append(
            EpisodeRecord(
                episode=len(self.records),
                strategy=strategy,
                mode=sel.mode,
                goal_kind=goal.kind,
                target_kind=target.kind,
                region=sel.region,
                gamma1=gamma1,
                gamma2=gamma2,
                goal_gamma1=goal_gamma1,
                goal_gamma2=-min(goal_error(goal, ep, cfg) for ep in episodes),
                progress=prog,
                n_actions=len(episodes),
                tick=self.executor.tick,
            )
        )
        return episodes


def make_learner(algorithm: str, cfg: Config, seed: int, teachers: Mapping[int, Teacher] | None = None,
                 on_eval: Callable[[int, EpisodicMemory], None] | None = None) -> Learner:
    return Learner(algorithm, cfg, seed, teachers=teachers, on_eval=on_eval)
