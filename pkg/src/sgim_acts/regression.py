"""Memory-based inverse model: nearest neighbours in outcome space, Gaussian-weighted."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Config, EpisodicMemory, ModelColdError, Outcome

__all__ = ["LocalModel", "ModelColdError"]


@dataclass
class LocalModel:
    """Order-0 locally weighted inverse model over an episodic memory.

    ``k`` neighbours are weighted with ``exp(-d^2 / (2 w^2))`` where ``d`` is
    the normalised outcome distance and ``w`` the per-kind kernel width
    (a fraction of the box diagonal).
    """

    memory: EpisodicMemory
    cfg: Config

    @property
    def k(self) -> int:
        return self.cfg.knn_k

    def inverse_lookup(self, goal: Outcome) -> np.ndarray:
        idx, d = self.memory.nearest(goal, self.k)
        thetas = self.memory.thetas[self.memory.rows(goal.kind)[idx]]
        width = self.cfg.kernel_width(goal.kind)
        w = np.exp(-(d * d) / (2.0 * width * width))
        if len(idx) == 1 or np.all(w < 1e-300):
            theta = thetas[0].copy()
        else:
            theta = (w[:, None] * thetas).sum(axis=0) / w.sum()
        return np.clip(theta, self.cfg.lower, self.cfg.upper)

    def best_recorded(self, goal: Outcome) -> tuple[Outcome, float]:
        idx, d = self.memory.nearest(goal, 1)
        values = self.memory.values(goal.kind)[idx[0]]
        return Outcome(goal.kind, tuple(values.tolist())), float(d[0])

    def competence(self, goal: Outcome) -> float:
        """Signed closeness of the best memorised outcome: 0 is perfect, -1 the floor."""
        try:
            return -self.best_recorded(goal)[1]
        except ModelColdError:
            return -1.0
