"""CSV input for physiological recordings.

Input schema: header ``t_s,value``, one sample per row. The sample rate
is inferred from the timestamps, which must be uniform within 1%.
"""

from __future__ import annotations

import csv

import numpy as np

from .series import SamplingError, SignalFormatError, SignalSeries

JITTER_TOLERANCE = 0.01


def read_signal_csv(path) -> SignalSeries:
    times: list[float] = []
    values: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SignalFormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header[:2] != ["t_s", "value"]:
            raise SignalFormatError(f"{path}: expected header 't_s,value', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) < 2:
                raise SignalFormatError(f"{path}: line {lineno}: expected 2 columns")
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError as exc:
                raise SignalFormatError(f"{path}: line {lineno}: {exc}") from None
    if len(values) < 2:
        raise SignalFormatError(f"{path}: need at least 2 samples")
    t = np.asarray(times)
    dt = np.diff(t)
    if np.any(dt <= 0):
        bad = int(np.argmax(dt <= 0)) + 2
        raise SamplingError(f"{path}: line {bad + 1}: timestamps not strictly increasing")
    median_dt = float(np.median(dt))
    if float(np.max(np.abs(dt - median_dt))) > JITTER_TOLERANCE * median_dt:
        raise SamplingError(
            f"{path}: timestamp jitter exceeds {JITTER_TOLERANCE:.0%} of the "
            f"median interval {median_dt:.6g} s"
        )
    return SignalSeries(
        sample_rate_hz=1.0 / median_dt,
        samples=np.asarray(values),
        start_time_s=float(t[0]),
    )


def write_signal_csv(series: SignalSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "value"])
        for t, v in zip(series.times(), series.samples):
            writer.writerow([repr(float(t)), repr(float(v))])
