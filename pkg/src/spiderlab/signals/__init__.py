"""Offline physiological signal processing (EDA and PPG)."""

from .series import (
    InsufficientDataError,
    SamplingError,
    SignalFormatError,
    SignalLengthError,
    SignalSeries,
)
from .io import read_signal_csv, write_signal_csv
from .eda import (
    EdaDecomposition,
    ScrFeatures,
    eda_decompose,
    eda_preprocess,
    scl_normalize,
    scr_features,
)
from .ppg import (
    HrvFeatures,
    detect_pulse_peaks,
    hrv_features,
    nn_intervals_ms,
    ppg_preprocess,
    ppg_windows,
)

__all__ = [
    "SignalSeries",
    "SignalFormatError",
    "SamplingError",
    "SignalLengthError",
    "InsufficientDataError",
    "read_signal_csv",
    "write_signal_csv",
    "EdaDecomposition",
    "ScrFeatures",
    "eda_preprocess",
    "eda_decompose",
    "scl_normalize",
    "scr_features",
    "HrvFeatures",
    "ppg_preprocess",
    "ppg_windows",
    "detect_pulse_peaks",
    "nn_intervals_ms",
    "hrv_features",
]
