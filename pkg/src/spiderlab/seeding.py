"""Deterministic RNG derivation.

Every random draw in the package flows from one master seed through an
explicit derivation path (stream label plus indices such as subject,
repetition, agent slot). No module touches global RNG state.
"""

from __future__ import annotations

import numpy as np

# Stream labels keep generators derived from the same master seed from
# colliding across experiment stages.
STREAM_POPULATION = 1
STREAM_SEARCH = 2
STREAM_SESSION = 3
STREAM_AGENT = 4
STREAM_NOISE = 5
STREAM_CLUSTER = 6


def seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    if master_seed < 0:
        raise ValueError("master seed must be non-negative")
    return np.random.SeedSequence([int(master_seed)] + [int(p) for p in path])


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the given derivation path, independent across paths."""
    return np.random.default_rng(seed_sequence(master_seed, *path))


def derive_seed(master_seed: int, *path: int) -> int:
    """Collapse a derivation path into a single printable 64-bit seed."""
    return int(seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0])
