"""Scaled-Gaussian reward over the 0..10 anxiety scale.

The reward is a normal bump centered on the target anxiety with spread
delta = (10 - 0) / 2 = 5, rescaled so the target scores exactly 1 and
the anxiety endpoint farthest from the target scores exactly -1. Agents
receive the reward evaluated on the discretized integer anxiety;
``reward_continuous`` exposes the underlying real-valued curve for
analysis plots.
"""

from __future__ import annotations

import math

ANXIETY_MIN = 0
ANXIETY_MAX = 10
DELTA = (ANXIETY_MAX - ANXIETY_MIN) / 2  # = 5


def reward_continuous(x: float, target: float) -> float:
    """Reward for a real-valued anxiety ``x`` in [0, 10].

    For target < 5 the far endpoint is 10; for target >= 5 it is 0. The
    normalizing constant is the Gaussian evaluated at that endpoint, which
    pins the output range to exactly [-1, 1].
    """
    if not ANXIETY_MIN <= x <= ANXIETY_MAX:
        raise ValueError(f"anxiety {x} outside [{ANXIETY_MIN}, {ANXIETY_MAX}]")
    if not ANXIETY_MIN <= target <= ANXIETY_MAX:
        raise ValueError(f"target {target} outside [{ANXIETY_MIN}, {ANXIETY_MAX}]")
    if target < 5:
        far = ANXIETY_MAX - target
    else:
        far = ANXIETY_MIN - target
    g = math.exp(-0.5 * ((x - target) / DELTA) ** 2)
    g_far = math.exp(-0.5 * (far / DELTA) ** 2)
    return (2.0 * g - g_far - 1.0) / (1.0 - g_far)


def reward(anxiety: int, target: int) -> float:
    """Reward for a discretized integer anxiety level."""
    if anxiety != int(anxiety):
        raise ValueError(f"discretized anxiety must be an integer, got {anxiety}")
    if target != int(target):
        raise ValueError(f"target anxiety must be an integer, got {target}")
    return reward_continuous(int(anxiety), int(target))
