"""Strategic active learning of throwing and placing: intrinsic exploration, mimicry and emulation."""

from .core import Config, EpisodicMemory, Outcome, Strategy, distance, place, throw, wrap_angle

__all__ = ["Config", "EpisodicMemory", "Outcome", "Strategy", "distance", "place", "throw", "wrap_angle"]
__version__ = "0.1.0"
