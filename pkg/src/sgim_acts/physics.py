"""One-joint arm driven by piecewise-constant angular acceleration, and the ball it releases.

The pivot sits at ``(0, pivot_height)``; the angle is measured counterclockwise
from the +x axis. Everything here is closed form, so repeated calls with the
same parameters give bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Config, Outcome, check_params, place, throw, wrap_angle


@dataclass(frozen=True)
class ArmState:
    phi: float
    phi_dot: float
    t: float

    @property
    def phi_wrapped(self) -> float:
        return wrap_angle(self.phi)


@dataclass(frozen=True)
class ReleaseState:
    pos: tuple
    vel: tuple


def simulate_arm(theta: np.ndarray, cfg: Config) -> ArmState:
    """Integrate the motor primitive exactly, segment by segment, from rest at phi = 0."""
    theta = check_params(theta, cfg)
    phi = phi_dot = t = 0.0
    for accel, dur in zip(theta[0::2].tolist(), theta[1::2].tolist()):
        phi += phi_dot * dur + 0.5 * accel * dur * dur
        phi_dot += accel * dur
        t += dur
    return ArmState(phi, phi_dot, t)


def release_state(final: ArmState, cfg: Config) -> ReleaseState:
    c, s = math.cos(final.phi), math.sin(final.phi)
    L = cfg.arm_length
    return ReleaseState(
        pos=(L * c, cfg.pivot_height + L * s),
        vel=(-L * final.phi_dot * s, L * final.phi_dot * c),
    )


def impact_time(z0: float, vz: float, g: float) -> float:
    """Positive root of z0 + vz t - g t^2 / 2 = 0 (zero when released on the ground moving down)."""
    disc = vz * vz + 2.0 * g * max(z0, 0.0)
    return (vz + math.sqrt(disc)) / g


def ball_flight(rs: ReleaseState, cfg: Config) -> tuple[float, float]:
    """Landing distance and apex height of a ball released in ``rs``.

    The ball bounces elastically at most once off the vertical wall at
    ``cfg.wall_x``: after the bounce vx < 0, so it can never reach the wall again.
    """
    x0, z0 = rs.pos
    vx, vz = rs.vel
    g = cfg.gravity
    t_hit = impact_time(z0, vz, g)
    x = x0 + vx * t_hit
    if vx > 0.0 and x > cfg.wall_x:
        x = 2.0 * cfg.wall_x - x
    if cfg.paper_literal_h:
        h = z0 + (vx * vx + vz * vz) / (2.0 * g)
    else:
        h = z0 + max(0.0, vz) ** 2 / (2.0 * g)
    return x, h


def execute_policy(theta: np.ndarray, cfg: Config) -> list[Outcome]:
    """Run the arm and report a throw, plus a place if the tip ends slower than v_max."""
    final = simulate_arm(theta, cfg)
    x, h = ball_flight(release_state(final, cfg), cfg)
    outcomes = [throw(x, h)]
    if cfg.arm_length * abs(final.phi_dot) < cfg.v_max:
        outcomes.append(place(final.phi_wrapped))
    return outcomes
