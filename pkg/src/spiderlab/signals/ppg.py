"""Photoplethysmography processing and heart-rate-variability features.

Pipeline: 0.5-8 Hz band-pass (4th-order Butterworth, zero-phase),
fixed 60 s non-overlapping windows, systolic peak detection bounded to
the 40-200 BPM physiological band, then time-domain statistics of the
inter-beat (NN) intervals and Welch band powers of the 4 Hz resampled
tachogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .filters import bandpass
from .series import InsufficientDataError, SignalSeries

PPG_BAND_HZ = (0.5, 8.0)
WINDOW_S = 60.0
MIN_BPM = 40.0
MAX_BPM = 200.0
TACHOGRAM_RATE_HZ = 4.0
LF_BAND_HZ = (0.04, 0.15)
HF_BAND_HZ = (0.15, 0.40)


@dataclass(frozen=True)
class HrvFeatures:
    mean_nn_ms: float
    sdnn_ms: float
    rmssd_ms: float
    pnn20: float
    pnn50: float
    lf_power: float
    hf_power: float
    lf_hf_ratio: float
    ln_hf: float


def ppg_preprocess(raw: SignalSeries,
                   band_hz: tuple[float, float] = PPG_BAND_HZ) -> SignalSeries:
    """Band-pass the raw optical pulse signal (removes DC and high-band noise)."""
    if raw.sample_rate_hz <= 2 * band_hz[1]:
        raise ValueError(
            f"sample rate {raw.sample_rate_hz} Hz too low for a {band_hz[1]} Hz band edge"
        )
    return raw.with_samples(bandpass(raw.samples, raw.sample_rate_hz, *band_hz))


def ppg_windows(signal: SignalSeries, window_s: float = WINDOW_S) -> list[SignalSeries]:
    """Non-overlapping fixed windows; the sub-window remainder is dropped."""
    window_len = int(round(window_s * signal.sample_rate_hz))
    n_windows = signal.samples.size // window_len
    out = []
    for i in range(n_windows):
        chunk = signal.samples[i * window_len:(i + 1) * window_len]
        out.append(SignalSeries(
            signal.sample_rate_hz, chunk,
            signal.start_time_s + i * window_len / signal.sample_rate_hz,
        ))
    return out


def detect_pulse_peaks(signal: SignalSeries,
                       min_bpm: float = MIN_BPM,
                       max_bpm: float = MAX_BPM) -> np.ndarray:
    """Systolic peak indices.

    Adaptive height threshold (half a standard deviation above the mean)
    plus the minimum inter-peak spacing implied by ``max_bpm``.
    """
    x = signal.samples
    distance = max(1, int(round(signal.sample_rate_hz * 60.0 / max_bpm)))
    height = float(x.mean() + 0.5 * x.std())
    peaks, _ = sps.find_peaks(x, distance=distance, height=height)
    return peaks


def nn_intervals_ms(signal: SignalSeries) -> np.ndarray:
    peaks = detect_pulse_peaks(signal)
    if peaks.size < 2:
        raise InsufficientDataError(
            f"found {peaks.size} beats, need at least 2 for NN intervals"
        )
    return np.diff(peaks) / signal.sample_rate_hz * 1000.0


def _band_power(freqs: np.ndarray, psd: np.ndarray,
                band: tuple[float, float]) -> float:
    mask = (freqs >= band[0]) & (freqs < band[1])
    if mask.sum() < 2:
        return float("nan")
    return float(np.trapezoid(psd[mask], freqs[mask]))


def hrv_features(window: SignalSeries) -> HrvFeatures:
    """Time- and frequency-domain HRV features for one analysis window."""
    peaks = detect_pulse_peaks(window)
    if peaks.size < 2:
        raise InsufficientDataError(
            f"found {peaks.size} beats, need at least 2 for HRV features"
        )
    peak_times = peaks / window.sample_rate_hz
    nn = np.diff(peak_times) * 1000.0
    diffs = np.diff(nn)

    mean_nn = float(nn.mean())
    sdnn = float(nn.std())  # population std over the window's intervals
    if diffs.size:
        rmssd = float(np.sqrt(np.mean(diffs ** 2)))
        pnn20 = float(np.mean(np.abs(diffs) > 20.0))
        pnn50 = float(np.mean(np.abs(diffs) > 50.0))
    else:
        rmssd = 0.0
        pnn20 = 0.0
        pnn50 = 0.0

    lf = hf = ratio = ln_hf = float("nan")
    if nn.size >= 4:
        # Tachogram sampled at each beat's arrival, resampled to a uniform grid.
        beat_t = peak_times[1:]
        grid = np.arange(beat_t[0], beat_t[-1], 1.0 / TACHOGRAM_RATE_HZ)
        if grid.size >= 8:
            tachogram = np.interp(grid, beat_t, nn)
            freqs, psd = sps.welch(
                tachogram,
                fs=TACHOGRAM_RATE_HZ,
                nperseg=min(256, grid.size),
            )
            lf = _band_power(freqs, psd, LF_BAND_HZ)
            hf = _band_power(freqs, psd, HF_BAND_HZ)
            if not math.isnan(hf) and hf > 0:
                ln_hf = math.log(hf)
                if not math.isnan(lf):
                    ratio = lf / hf

    return HrvFeatures(
        mean_nn_ms=mean_nn,
        sdnn_ms=sdnn,
        rmssd_ms=rmssd,
        pnn20=pnn20,
        pnn50=pnn50,
        lf_power=lf,
        hf_power=hf,
        lf_hf_ratio=ratio,
        ln_hf=ln_hf,
    )
