"""Policy-space exploration: goal-directed optimisation and mimicry.

Every policy tried here is a real execution: it goes through an
:class:`Executor`, which runs the simulator and files the result in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Generator

import numpy as np

from .core import (
    N_SEGMENTS,
    Config,
    Episode,
    EpisodicMemory,
    ModelColdError,
    Outcome,
    Strategy,
    distance,
    random_params,
)
from .physics import execute_policy
from .regression import LocalModel


class BudgetExhausted(RuntimeError):
    pass


class NumericalError(RuntimeError):
    pass


class Executor:
    """Runs policies and records each execution as an episode in memory.

    ``budget`` caps the total number of executions; ``on_action`` is called
    after each one with the running action count (the harness uses it to
    evaluate at fixed action counts).
    """

    def __init__(
        self,
        memory: EpisodicMemory,
        cfg: Config,
        execute: Callable[[np.ndarray, Config], list] = execute_policy,
        budget: int | None = None,
        on_action: Callable[[int], None] | None = None,
    ):
        self.memory = memory
        self.cfg = cfg
        self.execute = execute
        self.budget = budget
        self.on_action = on_action
        self.tick = 0

    @property
    def remaining(self) -> int:
        return math.inf if self.budget is None else self.budget - self.tick

    def __call__(self, theta: np.ndarray, goal: Outcome | None, strategy: Strategy | None) -> Episode:
        if self.remaining <= 0:
            raise BudgetExhausted(f"action budget of {self.budget} spent")
        theta = np.array(theta, dtype=float)
        observed = tuple(self.execute(theta, self.cfg))
        for o in observed:
            if not all(math.isfinite(v) for v in o.values):
                raise NumericalError(f"non-finite outcome {o} at action {self.tick} for theta={theta.tolist()}")
        episode = Episode(theta, observed, goal, strategy, self.tick)
        self.memory.add(episode)
        self.tick += 1
        if self.on_action is not None:
            self.on_action(self.tick)
        return episode


def gao_han_coefficients(n: int) -> tuple[float, float, float, float]:
    """Dimension-adapted reflection, expansion, contraction and shrink coefficients."""
    return 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n


def nelder_mead(
    x0: np.ndarray,
    step: np.ndarray,
    alpha: float | None = None,
    gamma: float | None = None,
    rho: float | None = None,
    sigma: float | None = None,
) -> Generator[np.ndarray, float, None]:
    """Nelder-Mead as a coroutine: yields points, is sent back their values.

    The initial simplex is ``x0`` plus one vertex per axis displaced by
    ``step``. Coefficients default to the dimension-adapted ones, which keep
    the method convergent past a handful of dimensions.

    >>> gen = nelder_mead(np.zeros(2), np.ones(2))
    >>> x = next(gen)
    >>> for _ in range(200):
    ...     x = gen.send(float(((x - 3.0) ** 2).sum()))
    >>> bool(np.allclose(x, 3.0, atol=1e-3))
    True
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    a, g, r, s = gao_han_coefficients(n)
    alpha = a if alpha is None else alpha
    gamma = g if gamma is None else gamma
    rho = r if rho is None else rho
    sigma = s if sigma is None else sigma

    pts = np.empty((n + 1, n))
    vals = np.empty(n + 1)
    pts[0] = x0
    vals[0] = yield x0.copy()
    for i in range(n):
        x = x0.copy()
        x[i] += step[i]
        pts[i + 1] = x
        vals[i + 1] = yield x.copy()

    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        centroid = pts[:-1].mean(axis=0)
        worst = pts[-1]

        xr = centroid + alpha * (centroid - worst)
        fr = yield xr.copy()
        if fr < vals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = yield xe.copy()
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = yield xc.copy()
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)
            fc = yield xc.copy()
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        for i in range(1, n + 1):
            pts[i] = pts[0] + sigma * (pts[i] - pts[0])
            vals[i] = yield pts[i].copy()


def bounded(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, float]:
    """Clamp ``x`` into the box and return the squared overshoot, scaled by the box widths."""
    clipped = np.minimum(np.maximum(x, lower), upper)
    over = (x - clipped) / (upper - lower)
    return clipped, float(over @ over)


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    incumbents: list


def minimize(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    step: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    max_evals: int,
    target: float = -math.inf,
    penalty: float = 1.0,
    **coefficients: float,
) -> MinimizeResult:
    """Bounded Nelder-Mead: evaluates only clamped points, penalises the overshoot.

    The simplex itself may leave the box. Each point is evaluated where it
    clamps to, and the optimiser is told ``f + penalty * overshoot`` so that
    it drifts back; ``penalty`` should be of the order of the objective's
    spread across the box.
    """
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    gen = nelder_mead(np.asarray(x0, float), np.asarray(step, float), **coefficients)
    x = next(gen)
    best_x, best_f = None, math.inf
    incumbents = []
    for nfev in range(1, max_evals + 1):
        xc, overshoot = bounded(x, lower, upper)
        value = f(xc)
        if value < best_f:
            best_x, best_f = xc, value
        incumbents.append(best_f)
        if best_f <= target or nfev == max_evals:
            break
        x = gen.send(value + penalty * overshoot)
    return MinimizeResult(best_x, best_f, nfev, incumbents)


def goal_error(goal: Outcome, episode: Episode, cfg: Config) -> float:
    reached = episode.outcome(goal.kind)
    return 1.0 if reached is None else distance(goal, reached, cfg)


def random_slots(n_actions: int, rho_rand: float) -> set[int]:
    """Positions of the global random draws inside an optimisation batch.

    The first slot always goes to the inverse-model seed.
    """
    n_rand = min(math.ceil(rho_rand * n_actions), n_actions - 1)
    return {int((j + 1) * n_actions / (n_rand + 1)) for j in range(n_rand)}


def goal_directed_optimisation(
    goal: Outcome,
    model: LocalModel,
    n_actions: int,
    rng: np.random.Generator,
    executor: Executor,
    strategy: Strategy | None = None,
) -> list[Episode]:
    """Spend ``n_actions`` executions trying to reach ``goal``.

    Nelder-Mead is seeded from the inverse model (a random policy when the
    memory holds no outcome of the goal's kind), with random global draws
    interleaved. Returns the episodes in execution order.
    """
    cfg = executor.cfg
    lower, upper = cfg.lower, cfg.upper
    try:
        seed = model.inverse_lookup(goal)
    except ModelColdError:
        seed = random_params(rng, cfg)
    slots = random_slots(n_actions, cfg.rho_rand)
    gen = nelder_mead(seed, cfg.simplex_step * (upper - lower))
    x = next(gen)
    episodes = []
    for i in range(n_actions):
        if i in slots:
            episodes.append(executor(random_params(rng, cfg), goal, strategy))
            continue
        theta, overshoot = bounded(x, lower, upper)
        ep = executor(theta, goal, strategy)
        episodes.append(ep)
        if i < n_actions - 1:
            x = gen.send(goal_error(goal, ep, cfg) + overshoot)
    return episodes


def mimic_policy(
    theta_d: np.ndarray,
    n_actions: int,
    rng: np.random.Generator,
    executor: Executor,
    epsilon: float,
    goal: Outcome | None = None,
    strategy: Strategy | None = None,
) -> list[Episode]:
    """Repeat a demonstrated policy with uniform noise of ``epsilon`` times each parameter's range."""
    cfg = executor.cfg
    lower, upper = cfg.lower, cfg.upper
    theta_d = np.clip(np.asarray(theta_d, float), lower, upper)
    radius = epsilon * (upper - lower)
    episodes = []
    for _ in range(n_actions):
        theta = theta_d + rng.uniform(-radius, radius) if epsilon > 0 else theta_d
        episodes.append(executor(np.clip(theta, lower, upper), goal, strategy))
    return episodes


def demo_to_params(theta_true: np.ndarray, sign_flipped: bool = False) -> np.ndarray:
    """What the learner reads off a demonstration in the shared primitive encoding.

    With ``sign_flipped`` the accelerations of the last two segments are
    perceived with the opposite sign.
    """
    theta = np.array(theta_true, dtype=float)
    if sign_flipped:
        for seg in (N_SEGMENTS - 2, N_SEGMENTS - 1):
            theta[2 * seg] = -theta[2 * seg]
    return theta
