"""Spider content space: six ordinal attributes, their indexing and edits.

The space is the cross product of
locomotion(3) x amount_of_movement(3) x closeness(3) x largeness(3)
x hairiness(2) x color(3) = 486 distinct spiders. States are serialized
canonically as a mixed-radix index with locomotion as the most
significant digit, so Q-tables and trace files share one numbering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

ATTRIBUTE_NAMES = (
    "locomotion",
    "amount_of_movement",
    "closeness",
    "largeness",
    "hairiness",
    "color",
)
# Short column names used in CSV traces.
ATTRIBUTE_COLUMNS = ("loc", "aom", "close", "large", "hair", "color")
RADICES = (3, 3, 3, 3, 2, 3)
N_ATTRIBUTES = 6
N_STATES = 486
# Canonical action slots: slot 2*i is "attribute i, +1", slot 2*i+1 is
# "attribute i, -1". Ordering fixes epsilon-greedy tie-breaking.
N_ACTION_SLOTS = 2 * N_ATTRIBUTES


class InvalidActionError(ValueError):
    """Raised when an attribute edit would leave the declared bounds."""


@dataclass(frozen=True)
class SpiderAttributes:
    """One point in the 486-spider content space."""

    locomotion: int
    amount_of_movement: int
    closeness: int
    largeness: int
    hairiness: int
    color: int

    def __post_init__(self) -> None:
        for value, radix, name in zip(self.as_tuple(), RADICES, ATTRIBUTE_NAMES):
            if not 0 <= value < radix:
                raise ValueError(f"{name}={value} outside 0..{radix - 1}")

    def as_tuple(self) -> tuple[int, ...]:
        return (
            self.locomotion,
            self.amount_of_movement,
            self.closeness,
            self.largeness,
            self.hairiness,
            self.color,
        )

    @classmethod
    def from_tuple(cls, values) -> "SpiderAttributes":
        return cls(*(int(v) for v in values))

    @classmethod
    def all_zero(cls) -> "SpiderAttributes":
        return cls(0, 0, 0, 0, 0, 0)

    @classmethod
    def all_max(cls) -> "SpiderAttributes":
        return cls.from_tuple(tuple(r - 1 for r in RADICES))


@dataclass(frozen=True)
class AttributeAction:
    """Single-step edit: bump one attribute by +1 or -1."""

    attribute_index: int
    direction: int

    def __post_init__(self) -> None:
        if not 0 <= self.attribute_index < N_ATTRIBUTES:
            raise ValueError(f"attribute_index {self.attribute_index} outside 0..5")
        if self.direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {self.direction}")

    @property
    def slot(self) -> int:
        return 2 * self.attribute_index + (0 if self.direction == 1 else 1)

    @classmethod
    def from_slot(cls, slot: int) -> "AttributeAction":
        if not 0 <= slot < N_ACTION_SLOTS:
            raise ValueError(f"slot {slot} outside 0..{N_ACTION_SLOTS - 1}")
        return cls(slot // 2, 1 if slot % 2 == 0 else -1)


def encode(spider: SpiderAttributes) -> int:
    """Mixed-radix state index in 0..485; locomotion is most significant."""
    index = 0
    for value, radix in zip(spider.as_tuple(), RADICES):
        index = index * radix + value
    return index


def decode(state_index: int) -> SpiderAttributes:
    """Inverse of :func:`encode`."""
    if not 0 <= state_index < N_STATES:
        raise ValueError(f"state index {state_index} outside 0..{N_STATES - 1}")
    digits = []
    rest = int(state_index)
    for radix in reversed(RADICES):
        digits.append(rest % radix)
        rest //= radix
    return SpiderAttributes.from_tuple(reversed(digits))


def all_states() -> Iterator[SpiderAttributes]:
    for index in range(N_STATES):
        yield decode(index)


def _build_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    attrs = np.zeros((N_STATES, N_ATTRIBUTES), dtype=np.int8)
    valid = np.zeros((N_STATES, N_ACTION_SLOTS), dtype=bool)
    nxt = np.full((N_STATES, N_ACTION_SLOTS), -1, dtype=np.int16)
    for index in range(N_STATES):
        values = decode(index).as_tuple()
        attrs[index] = values
        for slot in range(N_ACTION_SLOTS):
            attr = slot // 2
            step = 1 if slot % 2 == 0 else -1
            target = values[attr] + step
            if 0 <= target < RADICES[attr]:
                edited = list(values)
                edited[attr] = target
                valid[index, slot] = True
                nxt[index, slot] = encode(SpiderAttributes.from_tuple(edited))
    return attrs, valid, nxt


# Dense transition tables shared by the agents and the experiment loops.
STATE_ATTRIBUTES, VALID_SLOTS, NEXT_STATE = _build_tables()
ATTRIBUTE_MAXES = np.array([r - 1 for r in RADICES], dtype=np.int8)


def valid_actions(spider: SpiderAttributes) -> list[AttributeAction]:
    """Legal one-step edits, attribute index ascending, +1 before -1."""
    index = encode(spider)
    return [
        AttributeAction.from_slot(slot)
        for slot in range(N_ACTION_SLOTS)
        if VALID_SLOTS[index, slot]
    ]


def apply_action(spider: SpiderAttributes, action: AttributeAction) -> SpiderAttributes:
    """Apply a single-attribute edit; raises if it would leave bounds."""
    index = encode(spider)
    if not VALID_SLOTS[index, action.slot]:
        raise InvalidActionError(
            f"action (attr={action.attribute_index}, dir={action.direction:+d}) "
            f"invalid for state {spider.as_tuple()}"
        )
    return decode(int(NEXT_STATE[index, action.slot]))


@dataclass(frozen=True)
class VisualParameters:
    """Numeric rendering parameters behind the ordinal attributes."""

    speed: float
    waiting_time_s: float
    walking_duration_s: float
    inner_radius_r1: float
    outer_radius_r2: float
    scale: float
    fur_length: float
    color_rgb: tuple[int, int, int]


_MOVEMENT_SPEED = (1.0, 1.5, 3.0)
_MOVEMENT_WAITING_S = (5.0, 3.0, 1.0)
_MOVEMENT_WALKING_S = (8.0, 10.0, 12.0)
_CLOSENESS_RADII = ((7.0, 9.0), (5.0, 7.0), (3.0, 5.0))
_LARGENESS_SCALE = (0.25, 0.5, 1.0)
_HAIRINESS_FUR = (0.0, 0.08)
_COLOR_RGB = ((123, 113, 113), (77, 40, 42), (0, 0, 0))


def visual_parameters(spider: SpiderAttributes) -> VisualParameters:
    """Look up the rendering parameters for a spider. Pure and total."""
    r1, r2 = _CLOSENESS_RADII[spider.closeness]
    return VisualParameters(
        speed=_MOVEMENT_SPEED[spider.amount_of_movement],
        waiting_time_s=_MOVEMENT_WAITING_S[spider.amount_of_movement],
        walking_duration_s=_MOVEMENT_WALKING_S[spider.amount_of_movement],
        inner_radius_r1=r1,
        outer_radius_r2=r2,
        scale=_LARGENESS_SCALE[spider.largeness],
        fur_length=_HAIRINESS_FUR[spider.hairiness],
        color_rgb=_COLOR_RGB[spider.color],
    )
