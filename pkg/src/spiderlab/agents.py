"""Adaptation policies: tabular Q-learning and the correction-factor rules.

Both policies pick one single-attribute edit per step. The Q-learning
agent learns per individual from the scaled-Gaussian reward; the rules
agent maps a correction factor through fixed per-attribute interval
tables and steps a randomly chosen mismatched attribute toward its
mapped target. A uniform random-walk agent is included as the
comparison floor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spider import (
    N_ACTION_SLOTS,
    N_ATTRIBUTES,
    N_STATES,
    NEXT_STATE,
    VALID_SLOTS,
    STATE_ATTRIBUTES,
    AttributeAction,
    SpiderAttributes,
    encode,
)


@dataclass(frozen=True)
class AgentConfig:
    """Q-learning hyperparameters. Epsilon matches the deployed system;
    alpha and gamma are tuned for the ~14 adaptation steps a session allows."""

    epsilon: float = 0.05
    alpha: float = 0.5
    gamma: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon {self.epsilon} outside [0, 1]")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma {self.gamma} outside [0, 1)")


class QTable:
    """Dense state-action value store over 486 states x 12 action slots.

    Invalid slots (edits that would leave bounds) are masked and never
    selected. ``init_mode`` is either "zero" or "random"; random entries
    are i.i.d. uniform in [0, 1) drawn from ``seed``.
    """

    def __init__(self, init_mode: str = "zero", seed: int | None = None):
        if init_mode == "zero":
            self.values = np.zeros((N_STATES, N_ACTION_SLOTS), dtype=np.float64)
        elif init_mode == "random":
            if seed is None:
                raise ValueError("random init requires a seed")
            rng = np.random.default_rng(seed)
            self.values = rng.random((N_STATES, N_ACTION_SLOTS))
        else:
            raise ValueError(f"unknown init mode {init_mode!r}")
        self.init_mode = init_mode

    def best_value(self, state_index: int) -> float:
        """Max Q over valid slots of the state."""
        row = self.values[state_index]
        return float(row[VALID_SLOTS[state_index]].max())

    def greedy_slot(self, state_index: int) -> int:
        """Argmax over valid slots; ties break toward the canonical order."""
        row = np.where(VALID_SLOTS[state_index], self.values[state_index], -np.inf)
        return int(np.argmax(row))

    def export_csv(self, path) -> None:
        """Dense snapshot: state_index,action_slot,q_value (invalid slots empty)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["state_index", "action_slot", "q_value"])
            for s in range(N_STATES):
                for slot in range(N_ACTION_SLOTS):
                    q = repr(self.values[s, slot]) if VALID_SLOTS[s, slot] else ""
                    writer.writerow([s, slot, q])


def ql_select_slot(
    q: QTable, state_index: int, cfg: AgentConfig, rng: np.random.Generator
) -> int:
    """Epsilon-greedy slot choice on raw state indices (hot path)."""
    valid = np.flatnonzero(VALID_SLOTS[state_index])
    if rng.random() < cfg.epsilon:
        return int(valid[rng.integers(len(valid))])
    return q.greedy_slot(state_index)


def ql_select_action(
    q: QTable, state: SpiderAttributes, cfg: AgentConfig, rng: np.random.Generator
) -> AttributeAction:
    """Epsilon-greedy action: uniform valid action w.p. epsilon, else argmax-Q."""
    return AttributeAction.from_slot(ql_select_slot(q, encode(state), cfg, rng))


def ql_update_index(
    q: QTable, s: int, slot: int, r: float, s_next: int, cfg: AgentConfig
) -> None:
    """One-step Q-learning update with max bootstrap over valid next slots."""
    target = r + cfg.gamma * q.best_value(s_next)
    q.values[s, slot] += cfg.alpha * (target - q.values[s, slot])


def ql_update(
    q: QTable,
    s: SpiderAttributes,
    a: AttributeAction,
    r: float,
    s_next: SpiderAttributes,
    cfg: AgentConfig,
) -> None:
    ql_update_index(q, encode(s), a.slot, r, encode(s_next), cfg)


# ---------------------------------------------------------------------------
# Rules-based policy
# ---------------------------------------------------------------------------

def correction_factor(current_anxiety: float, desired_anxiety: float) -> float:
    """(current - desired) / 10, both on the 0..10 anxiety scale."""
    cf = (current_anxiety - desired_anxiety) / 10.0
    if not -1.0 <= cf <= 1.0:
        raise ValueError(f"correction factor {cf} outside [-1, 1]")
    return cf


def _three_level(cf: float, left_edge: float, right_edge: float) -> int:
    # [-1, left_edge) -> 2, [left_edge, right_edge] -> 1, (right_edge, 1] -> 0
    if cf < left_edge:
        return 2
    if cf <= right_edge:
        return 1
    return 0


def rb_targets(cf: float) -> tuple[int, int, int, int, int, int]:
    """Per-attribute target values for a correction factor in [-1, 1].

    Interval brackets (closed/open exactly as tabulated):
      locomotion          [-1,-0.7) -> 2, [-0.7, 0.3] -> 1, ( 0.3, 1] -> 0
      amount_of_movement  [-1,-0.5) -> 2, [-0.5, 0.4] -> 1, ( 0.4, 1] -> 0
      closeness           [-1,-0.7) -> 2, [-0.7,-0.1] -> 1, (-0.1, 1] -> 0
      largeness, color    [-1,-0.8) -> 2, [-0.8,-0.2] -> 1, (-0.2, 1] -> 0
      hairiness           [-1, 0] -> 1, (0, 1] -> 0
    """
    if not -1.0 <= cf <= 1.0:
        raise ValueError(f"correction factor {cf} outside [-1, 1]")
    return (
        _three_level(cf, -0.7, 0.3),
        _three_level(cf, -0.5, 0.4),
        _three_level(cf, -0.7, -0.1),
        _three_level(cf, -0.8, -0.2),
        1 if cf <= 0.0 else 0,
        _three_level(cf, -0.8, -0.2),
    )


def rb_candidates(current: SpiderAttributes, cf: float) -> list[int]:
    """Attribute indices whose current value differs from the mapped target."""
    targets = rb_targets(cf)
    return [i for i, (cur, tgt) in enumerate(zip(current.as_tuple(), targets)) if cur != tgt]


def rb_select_action(
    current: SpiderAttributes,
    cf: float,
    rng: np.random.Generator,
    empty_policy: str = "hold",
) -> Optional[AttributeAction]:
    """Pick one mismatched attribute uniformly and step it toward its target.

    Only one attribute changes per step. Returns None (hold) when every
    attribute already matches and ``empty_policy`` is "hold"; with
    "nudge" a random attribute steps against the sign of ``cf`` instead
    (negative cf, meaning anxiety below desired, steps up).
    """
    targets = rb_targets(cf)
    candidates = rb_candidates(current, cf)
    values = current.as_tuple()
    if candidates:
        attr = candidates[int(rng.integers(len(candidates)))]
        direction = 1 if targets[attr] > values[attr] else -1
        return AttributeAction(attr, direction)
    if empty_policy == "hold":
        return None
    if empty_policy == "nudge":
        if cf == 0.0:
            return None
        direction = 1 if cf < 0.0 else -1
        s = encode(current)
        slots = [
            2 * i + (0 if direction == 1 else 1)
            for i in range(N_ATTRIBUTES)
            if VALID_SLOTS[s, 2 * i + (0 if direction == 1 else 1)]
        ]
        if not slots:
            return None
        return AttributeAction.from_slot(slots[int(rng.integers(len(slots)))])
    raise ValueError(f"unknown empty-candidate policy {empty_policy!r}")


# ---------------------------------------------------------------------------
# Agent wrappers used by the experiment harnesses (index-based hot path)
# ---------------------------------------------------------------------------

class QLearningAgent:
    """Owns a Q-table and an rng stream for one session or search attempt."""

    def __init__(self, cfg: AgentConfig, init_mode: str, seed: int):
        self.cfg = cfg
        # Table seed and action seed draw from disjoint child streams.
        ss = np.random.SeedSequence(seed)
        table_seed, action_seed = ss.spawn(2)
        init_seed = int(table_seed.generate_state(1, np.uint64)[0])
        self.q = QTable(init_mode, seed=init_seed if init_mode == "random" else None)
        self.rng = np.random.default_rng(action_seed)

    def act(self, state_index: int, anxiety: int, target: int) -> Optional[int]:
        return ql_select_slot(self.q, state_index, self.cfg, self.rng)

    def learn(self, s: int, slot: int, r: float, s_next: int) -> None:
        ql_update_index(self.q, s, slot, r, s_next, self.cfg)


class RulesAgent:
    """Stateless correction-factor policy; no learning step."""

    def __init__(self, seed: int, empty_policy: str = "hold"):
        self.rng = np.random.default_rng(seed)
        self.empty_policy = empty_policy

    def act(self, state_index: int, anxiety: int, target: int) -> Optional[int]:
        current = STATE_ATTRIBUTES[state_index]
        cf = correction_factor(anxiety, target)
        action = rb_select_action(
            SpiderAttributes.from_tuple(current), cf, self.rng, self.empty_policy
        )
        return None if action is None else action.slot

    def learn(self, s: int, slot: int, r: float, s_next: int) -> None:
        pass


class RandomWalkAgent:
    """Uniform valid action each step; the comparison floor."""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def act(self, state_index: int, anxiety: int, target: int) -> Optional[int]:
        valid = np.flatnonzero(VALID_SLOTS[state_index])
        return int(valid[self.rng.integers(len(valid))])

    def learn(self, s: int, slot: int, r: float, s_next: int) -> None:
        pass


AGENT_KINDS = ("rl_zero", "rl_random", "rules", "random_walk")


def make_agent(kind: str, cfg: AgentConfig, seed: int, empty_policy: str = "hold"):
    """Factory over the roster names used in experiment configs."""
    if kind == "rl_zero":
        return QLearningAgent(cfg, "zero", seed)
    if kind == "rl_random":
        return QLearningAgent(cfg, "random", seed)
    if kind == "rules":
        return RulesAgent(seed, empty_policy)
    if kind == "random_walk":
        return RandomWalkAgent(seed)
    raise ValueError(f"unknown agent kind {kind!r}")


def apply_slot(state_index: int, slot: Optional[int]) -> int:
    """Next state index for a slot; None holds the current state."""
    if slot is None:
        return state_index
    nxt = int(NEXT_STATE[state_index, slot])
    if nxt < 0:
        raise ValueError(f"slot {slot} invalid for state {state_index}")
    return nxt
