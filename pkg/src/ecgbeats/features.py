"""Hand-crafted 76-dimensional feature vectors.

Layout: positions 0..69 the normalized beat, 70..72 the record-level RR
statistics (mean, median, population variance), 73 the beat's mean absolute
filtered amplitude, 74/75 the natural log of the previous / next RR interval
in seconds. The RR statistics are record-global and repeated on every beat
of that record.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .preprocess import BEAT_LEN, Beat

N_FEATURES = 76


def rr_intervals(rpeaks, fs: float) -> np.ndarray:
    """Consecutive R-peak spacings in seconds; empty for fewer than 2 peaks."""
    if fs <= 0:
        raise ValidationError(f"sampling rate must be positive, got {fs}")
    peaks = np.asarray(rpeaks, dtype=float)
    if peaks.shape[0] < 2:
        return np.empty(0)
    return np.diff(peaks) / fs


def hrv_stats(rr) -> tuple:
    """(mean, median, population variance) of an RR-interval sequence."""
    x = np.asarray(rr, dtype=float)
    if x.shape[0] == 0:
        raise ValidationError("hrv_stats needs at least one RR interval")
    return float(np.mean(x)), float(np.median(x)), float(np.var(x))


def beat_features(beat: Beat, record_hrv: tuple) -> np.ndarray:
    """Assemble one 76-dim feature row for a normalized beat."""
    if beat.samples.shape[0] != BEAT_LEN:
        raise ValidationError(f"beat has {beat.samples.shape[0]} samples, expected {BEAT_LEN}")
    if beat.rr_prev <= 0 or beat.rr_next <= 0:
        raise ValidationError(
            f"RR intervals must be positive, got ({beat.rr_prev}, {beat.rr_next})"
        )
    row = np.empty(N_FEATURES)
    row[:BEAT_LEN] = beat.samples
    row[70:73] = record_hrv
    row[73] = beat.raw_mean_abs_amplitude
    row[74] = math.log(beat.rr_prev)
    row[75] = math.log(beat.rr_next)
    return row


def build_feature_matrix(beats, rpeaks, fs: float):
    """Feature rows + label ids for all beats of one record.

    ``rpeaks`` is the record's full R-peak list (not just kept beats): the
    HRV statistics describe the whole recording.
    """
    stats = hrv_stats(rr_intervals(rpeaks, fs))
    rows = np.asarray([beat_features(b, stats) for b in beats]).reshape(len(beats), N_FEATURES)
    labels = np.asarray([b.label for b in beats], dtype=int)
    return rows, labels
