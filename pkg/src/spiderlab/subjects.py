"""Virtual subjects: parametric anxiety-response functions.

Each subject carries one non-negative impact weight per spider
attribute. Anxiety for a spider is the weighted attribute sum,
normalized by the subject's maximum attainable sum, scaled to 0..10,
optionally perturbed with Gaussian noise, then rounded to the nearest
integer and clamped. An optional habituation mode decays the effective
response multiplicatively with each exposure.

The shipped default population is illustrative only: movement
attributes and largeness get higher mean impact than hairiness and
color, loosely reflecting which spider features people most often
report as frightening. The values are not taken from any measured
dataset.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import seeding
from .spider import ATTRIBUTE_MAXES, N_ATTRIBUTES, STATE_ATTRIBUTES, SpiderAttributes, encode

_MAX_RESAMPLES = 100


@dataclass(frozen=True)
class SubjectPopulationConfig:
    """Sampling recipe for a population of virtual subjects."""

    impact_means: tuple[float, ...]
    impact_stds: tuple[float, ...]
    noise_sigma: float = 0.0
    n_subjects: int = 100
    master_seed: int = 2024
    habituation_decay: float | None = None  # None disables habituation

    def __post_init__(self) -> None:
        if len(self.impact_means) != N_ATTRIBUTES or len(self.impact_stds) != N_ATTRIBUTES:
            raise ValueError("impact means/stds must have one entry per attribute")
        if any(s < 0 for s in self.impact_stds):
            raise ValueError("impact stds must be non-negative")
        if not any(m > 0 for m in self.impact_means):
            raise ValueError("at least one impact mean must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be non-negative")
        if self.n_subjects < 1:
            raise ValueError("population needs at least one subject")
        if self.habituation_decay is not None and not 0.0 < self.habituation_decay <= 1.0:
            raise ValueError("habituation decay must be in (0, 1]")


def default_population_config(
    n_subjects: int = 100,
    master_seed: int = 2024,
    noise_sigma: float = 0.0,
    habituation_decay: float | None = None,
) -> SubjectPopulationConfig:
    """Illustrative defaults: movement and size dominate, appearance trails."""
    return SubjectPopulationConfig(
        impact_means=(5.0, 3.0, 2.0, 1.5, 0.5, 0.5),
        impact_stds=(1.0, 0.6, 0.5, 0.4, 0.2, 0.2),
        noise_sigma=noise_sigma,
        n_subjects=n_subjects,
        master_seed=master_seed,
        habituation_decay=habituation_decay,
    )


@dataclass(frozen=True)
class VirtualSubject:
    """One anxiety-response function. Weights are non-negative."""

    weights: tuple[float, ...]
    noise_sigma: float
    subject_seed: int
    habituation_decay: float | None = None

    def __post_init__(self) -> None:
        if len(self.weights) != N_ATTRIBUTES:
            raise ValueError("need one weight per attribute")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if self.max_weighted_sum() <= 0:
            raise ValueError("subject would be unresponsive (all-zero weighted range)")

    def max_weighted_sum(self) -> float:
        return float(np.dot(self.weights, ATTRIBUTE_MAXES))

    def continuous_anxiety(self, spider: SpiderAttributes) -> float:
        """Noise-free anxiety on the real 0..10 scale."""
        num = float(np.dot(self.weights, spider.as_tuple()))
        return 10.0 * num / self.max_weighted_sum()

    def anxiety_table(self) -> np.ndarray:
        """Noise-free continuous anxiety for all 486 states (hot path, cached)."""
        return _anxiety_table_cached(self.weights)


@lru_cache(maxsize=4096)
def _anxiety_table_cached(weights: tuple[float, ...]) -> np.ndarray:
    sums = STATE_ATTRIBUTES.astype(np.float64) @ np.asarray(weights)
    table = 10.0 * sums / float(np.dot(weights, ATTRIBUTE_MAXES))
    table.setflags(write=False)
    return table


def discretize_anxiety(value: float) -> int:
    """Round half up to the nearest integer, clamped to 0..10."""
    level = math.floor(value + 0.5)
    return max(0, min(10, level))


def evaluate(
    subject: VirtualSubject,
    spider: SpiderAttributes,
    rng: np.random.Generator | None = None,
) -> int:
    """Discretized anxiety 0..10 for one presentation.

    Noise requires an explicit generator so callers control the stream;
    with noise_sigma == 0 the function is pure.
    """
    value = subject.continuous_anxiety(spider)
    if subject.noise_sigma > 0:
        if rng is None:
            raise ValueError("noisy subject evaluation requires an rng")
        value += subject.noise_sigma * rng.standard_normal()
    return discretize_anxiety(value)


def sample_population(cfg: SubjectPopulationConfig) -> list[VirtualSubject]:
    """Draw the population; negative weight draws clamp to zero.

    Per-subject seeds derive from (master_seed, population stream,
    subject index) so downstream noise streams are reproducible
    independently of sampling order.
    """
    subjects = []
    for i in range(cfg.n_subjects):
        rng = seeding.derive_rng(cfg.master_seed, seeding.STREAM_POPULATION, i)
        weights = None
        for _ in range(_MAX_RESAMPLES):
            draw = rng.normal(cfg.impact_means, cfg.impact_stds)
            draw = np.clip(draw, 0.0, None)
            if float(np.dot(draw, ATTRIBUTE_MAXES)) > 0:
                weights = tuple(float(w) for w in draw)
                break
        if weights is None:
            raise ValueError(f"subject {i}: all-zero weights after {_MAX_RESAMPLES} resamples")
        subjects.append(
            VirtualSubject(
                weights=weights,
                noise_sigma=cfg.noise_sigma,
                subject_seed=seeding.derive_seed(cfg.master_seed, seeding.STREAM_POPULATION, i),
                habituation_decay=cfg.habituation_decay,
            )
        )
    return subjects


class SubjectResponder:
    """Stateful view of a subject within one session or search attempt.

    Owns the noise stream and the exposure counter for habituation, so
    parallel attempts on the same subject never share mutable state.
    """

    def __init__(self, subject: VirtualSubject, rng: np.random.Generator | None = None):
        self.subject = subject
        self.rng = rng
        self.exposures = 0
        self._base = subject.anxiety_table()

    def anxiety_of_index(self, state_index: int) -> int:
        value = float(self._base[state_index])
        if self.subject.habituation_decay is not None:
            value *= self.subject.habituation_decay ** self.exposures
        if self.subject.noise_sigma > 0:
            if self.rng is None:
                raise ValueError("noisy subject evaluation requires an rng")
            value += self.subject.noise_sigma * self.rng.standard_normal()
        self.exposures += 1
        return discretize_anxiety(value)

    def anxiety(self, spider: SpiderAttributes) -> int:
        return self.anxiety_of_index(encode(spider))


def export_population_csv(subjects: list[VirtualSubject], path) -> None:
    """One row per subject: weights, noise sigma and derived seed."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["subject", "w_locomotion", "w_amount_of_movement", "w_closeness",
             "w_largeness", "w_hairiness", "w_color", "noise_sigma", "seed"]
        )
        for i, s in enumerate(subjects):
            writer.writerow([i, *[repr(w) for w in s.weights], repr(s.noise_sigma), s.subject_seed])
