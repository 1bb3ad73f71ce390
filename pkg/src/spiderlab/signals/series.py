"""Uniformly sampled signal container and signal-processing errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SignalFormatError(ValueError):
    """Malformed signal file (bad header, non-numeric row, ...)."""


class SamplingError(ValueError):
    """Timestamps are not uniform within the documented 1% tolerance."""


class SignalLengthError(ValueError):
    """Signal too short for the requested filter or decimation."""


class InsufficientDataError(ValueError):
    """Not enough detectable beats or peaks to compute features."""


@dataclass(frozen=True)
class SignalSeries:
    """Uniformly sampled recording (EDA in microsiemens, PPG in a.u.)."""

    sample_rate_hz: float
    samples: np.ndarray
    start_time_s: float = 0.0

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.samples.size) / self.sample_rate_hz

    def with_samples(self, samples: np.ndarray) -> "SignalSeries":
        return SignalSeries(self.sample_rate_hz, samples, self.start_time_s)
