"""Zero-phase Butterworth filtering (forward-backward, 4th order default)."""

from __future__ import annotations

import numpy as np
from scipy import signal as sps

from .series import SignalLengthError


def _sos_filtfilt(x: np.ndarray, sos: np.ndarray) -> np.ndarray:
    # sosfiltfilt's default edge padding needs a few filter lengths of data.
    padlen = 3 * (2 * sos.shape[0] + 1)
    if x.size <= padlen:
        raise SignalLengthError(
            f"signal of {x.size} samples too short for zero-phase filtering "
            f"(needs > {padlen})"
        )
    return sps.sosfiltfilt(sos, x)


def lowpass(x: np.ndarray, fs: float, cutoff_hz: float, order: int = 4) -> np.ndarray:
    if cutoff_hz >= fs / 2:
        raise ValueError(f"cutoff {cutoff_hz} Hz at or above Nyquist ({fs / 2} Hz)")
    sos = sps.butter(order, cutoff_hz, btype="lowpass", fs=fs, output="sos")
    return _sos_filtfilt(np.asarray(x, dtype=np.float64), sos)


def highpass(x: np.ndarray, fs: float, cutoff_hz: float, order: int = 4) -> np.ndarray:
    if cutoff_hz >= fs / 2:
        raise ValueError(f"cutoff {cutoff_hz} Hz at or above Nyquist ({fs / 2} Hz)")
    sos = sps.butter(order, cutoff_hz, btype="highpass", fs=fs, output="sos")
    return _sos_filtfilt(np.asarray(x, dtype=np.float64), sos)


def bandpass(x: np.ndarray, fs: float, low_hz: float, high_hz: float,
             order: int = 4) -> np.ndarray:
    if not 0 < low_hz < high_hz:
        raise ValueError(f"invalid band {low_hz}-{high_hz} Hz")
    if high_hz >= fs / 2:
        raise ValueError(f"band edge {high_hz} Hz at or above Nyquist ({fs / 2} Hz)")
    sos = sps.butter(order, (low_hz, high_hz), btype="bandpass", fs=fs, output="sos")
    return _sos_filtfilt(np.asarray(x, dtype=np.float64), sos)
