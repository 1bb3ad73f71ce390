"""Electrodermal activity processing.

Pipeline: 0.25 Hz low-pass (4th-order Butterworth, zero-phase), moving
average decimation to 1 Hz, then tonic/phasic decomposition. The
default decomposition subtracts a centered running median (smoothing
baseline removal); the alternative subtracts a 0.05 Hz high-passed
phasic estimate instead. Either way the two components sum back to the
preprocessed input exactly.

Tonic level (SCL) maps to the 0..10 anxiety scale with a per-recording
minimum taken from a relax window and an assumed maximum of 20 uS.
Phasic (SCR) peaks count as responses when they rise at least 0.01 uS
above the preceding trough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy import signal as sps

from .filters import highpass, lowpass
from .series import SignalLengthError, SignalSeries

EDA_LOWPASS_HZ = 0.25
EDA_TARGET_RATE_HZ = 1.0
HIGHPASS_CUTOFF_HZ = 0.05
DEFAULT_MEDIAN_WINDOW_S = 8.0
DEFAULT_MIN_AMPLITUDE_US = 0.01
DEFAULT_MIN_PEAK_DISTANCE_S = 1.0

METHOD_MEDIAN = "median"
METHOD_HIGHPASS = "highpass"


@dataclass(frozen=True)
class EdaDecomposition:
    scl: SignalSeries  # tonic
    scr: SignalSeries  # phasic
    method: str


@dataclass(frozen=True)
class ScrFeatures:
    n_peaks: int
    mean_amplitude: float
    max_amplitude: float
    sum_amplitude: float


def eda_preprocess(raw: SignalSeries,
                   lowpass_hz: float = EDA_LOWPASS_HZ,
                   target_rate_hz: float = EDA_TARGET_RATE_HZ) -> SignalSeries:
    """Low-pass then decimate to 1 Hz by per-second block averaging."""
    if raw.sample_rate_hz < 2 * lowpass_hz:
        raise ValueError(
            f"sample rate {raw.sample_rate_hz} Hz below 2x the {lowpass_hz} Hz cutoff"
        )
    if raw.sample_rate_hz == target_rate_hz:
        return raw
    filtered = lowpass(raw.samples, raw.sample_rate_hz, lowpass_hz)
    step = raw.sample_rate_hz / target_rate_hz
    n_out = int(np.floor(filtered.size / step))
    if n_out < 1:
        raise SignalLengthError("signal shorter than one output sample after decimation")
    bounds = np.round(np.arange(n_out + 1) * step).astype(int)
    out = np.array([filtered[bounds[i]:bounds[i + 1]].mean() for i in range(n_out)])
    return SignalSeries(target_rate_hz, out, raw.start_time_s)


def eda_decompose(signal: SignalSeries, method: str = METHOD_MEDIAN,
                  window_s: float = DEFAULT_MEDIAN_WINDOW_S) -> EdaDecomposition:
    """Split into tonic (scl) and phasic (scr) so that scl + scr == input."""
    x = signal.samples
    if method == METHOD_MEDIAN:
        kernel = int(round(window_s * signal.sample_rate_hz))
        if kernel % 2 == 0:
            kernel += 1  # centered median needs odd support
        if kernel < 3:
            raise ValueError(f"median window of {kernel} samples, need >= 3")
        if kernel > x.size:
            raise ValueError(f"median window {kernel} exceeds signal length {x.size}")
        scl = ndimage.median_filter(x, size=kernel, mode="nearest")
        scr = x - scl
    elif method == METHOD_HIGHPASS:
        scr = highpass(x, signal.sample_rate_hz, HIGHPASS_CUTOFF_HZ)
        scl = x - scr
    else:
        raise ValueError(f"unknown decomposition method {method!r}")
    return EdaDecomposition(
        scl=signal.with_samples(scl),
        scr=signal.with_samples(scr),
        method=method,
    )


def scl_normalize(scl: SignalSeries, relax_min: float,
                  assumed_max: float = 20.0) -> SignalSeries:
    """Linear map [relax_min, assumed_max] -> [0, 10], clamped."""
    if relax_min >= assumed_max:
        raise ValueError(f"relax minimum {relax_min} must be below assumed max {assumed_max}")
    scaled = (scl.samples - relax_min) / (assumed_max - relax_min) * 10.0
    return scl.with_samples(np.clip(scaled, 0.0, 10.0))


def scr_features(scr: SignalSeries,
                 min_amplitude_us: float = DEFAULT_MIN_AMPLITUDE_US,
                 min_distance_s: float = DEFAULT_MIN_PEAK_DISTANCE_S) -> ScrFeatures:
    """Count phasic peaks and summarize their amplitudes.

    A peak is a local maximum rising at least ``min_amplitude_us`` above
    the trough since the previous local maximum (or the start of the
    signal for the first one). The peak itself must also clear the
    threshold; the phasic component is zero-baseline by construction, and
    this rejects filter-ringing lobes that rise from a negative dip.
    """
    x = scr.samples
    distance = max(1, int(round(min_distance_s * scr.sample_rate_hz)))
    candidates, _ = sps.find_peaks(x, distance=distance)
    amplitudes = []
    prev = 0
    for p in candidates:
        trough = float(x[prev:p + 1].min())
        amp = float(x[p]) - trough
        if amp >= min_amplitude_us and float(x[p]) >= min_amplitude_us:
            amplitudes.append(amp)
        prev = p
    if not amplitudes:
        return ScrFeatures(0, 0.0, 0.0, 0.0)
    amps = np.asarray(amplitudes)
    return ScrFeatures(
        n_peaks=len(amplitudes),
        mean_amplitude=float(amps.mean()),
        max_amplitude=float(amps.max()),
        sum_amplitude=float(amps.sum()),
    )
