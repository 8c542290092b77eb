# Copyright © 2026, abuse-prosody Contributors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Functionals that collapse a contour into per-recording statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from .config import PEAK_RELATIVE_THRESHOLD


@dataclass(frozen=True)
class FunctionalSummary:
    mean: float = 0.0
    std: float = 0.0
    p20: float = 0.0
    p50: float = 0.0
    p80: float = 0.0
    pctl_range_20_80: float = 0.0
    count: int = 0

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.mean, self.std, self.p20, self.p50, self.p80, self.pctl_range_20_80)


def apply_functionals(series: np.ndarray, mask: Optional[np.ndarray] = None) -> FunctionalSummary:
    """Mean, population std and linear-interpolated 20/50/80 percentiles.

    Non-finite entries are always dropped. An empty selection gives the all-zero summary.
    """
    values = np.asarray(series, dtype=np.float64)
    keep = np.isfinite(values)
    if mask is not None:
        keep &= np.asarray(mask, dtype=bool)
    values = values[keep]
    if values.size == 0:
        return FunctionalSummary()
    p20, p50, p80 = np.percentile(values, [20.0, 50.0, 80.0])
    return FunctionalSummary(
        mean=float(np.mean(values)),
        std=float(np.std(values)),
        p20=float(p20),
        p50=float(p50),
        p80=float(p80),
        pctl_range_20_80=float(p80 - p20),
        count=int(values.size),
    )


def masked_mean(series: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    return apply_functionals(series, mask).mean


class Segment(NamedTuple):
    start_s: float
    len_s: float
    kind: str  # "V" or "U"


@dataclass(frozen=True)
class VoicingSummary:
    segments: List[Segment]
    voiced_per_sec: float
    mean_voiced_len: float
    std_voiced_len: float
    mean_unvoiced_len: float


def segment_voicing(voiced: np.ndarray, hop_s: float) -> VoicingSummary:
    """Split the voicing flags into maximal runs and summarize their lengths."""
    flags = np.asarray(voiced, dtype=bool)
    if flags.size == 0:
        raise ValueError("segment_voicing needs at least one frame")

    change = np.flatnonzero(flags[1:] != flags[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [flags.size]))
    segments = [
        Segment(start * hop_s, (end - start) * hop_s, "V" if flags[start] else "U")
        for start, end in zip(starts, ends)
    ]

    voiced_lengths = np.array([seg.len_s for seg in segments if seg.kind == "V"])
    unvoiced_lengths = np.array([seg.len_s for seg in segments if seg.kind == "U"])
    duration_s = flags.size * hop_s
    return VoicingSummary(
        segments=segments,
        voiced_per_sec=voiced_lengths.size / duration_s,
        mean_voiced_len=float(voiced_lengths.mean()) if voiced_lengths.size else 0.0,
        std_voiced_len=float(voiced_lengths.std()) if voiced_lengths.size else 0.0,
        mean_unvoiced_len=float(unvoiced_lengths.mean()) if unvoiced_lengths.size else 0.0,
    )


@dataclass(frozen=True)
class LoudnessDynamics:
    rise_slope_mean: float = 0.0
    rise_slope_std: float = 0.0
    # falling slopes keep their negative sign
    fall_slope_mean: float = 0.0
    fall_slope_std: float = 0.0
    peaks_per_sec: float = 0.0
    n_peaks: int = 0


def find_loudness_peaks(loudness: np.ndarray, relative_threshold: float = PEAK_RELATIVE_THRESHOLD) -> np.ndarray:
    """Indices strictly above both neighbours and above min + threshold * (max - min)."""
    x = np.asarray(loudness, dtype=np.float64)
    if x.size < 3:
        return np.empty(0, dtype=int)
    low, high = x.min(), x.max()
    if high <= low:
        return np.empty(0, dtype=int)
    floor = low + relative_threshold * (high - low)
    middle = x[1:-1]
    is_peak = (middle > x[:-2]) & (middle > x[2:]) & (middle > floor)
    return np.flatnonzero(is_peak) + 1


def loudness_dynamics(
    loudness: np.ndarray,
    hop_s: float,
    relative_threshold: float = PEAK_RELATIVE_THRESHOLD,
) -> LoudnessDynamics:
    """Rising/falling slopes between troughs and peaks, and the peak rate."""
    x = np.asarray(loudness, dtype=np.float64)
    peaks = find_loudness_peaks(x, relative_threshold)
    if peaks.size == 0:
        return LoudnessDynamics()

    rises: List[float] = []
    falls: List[float] = []
    for k, peak in enumerate(peaks):
        left = 0 if k == 0 else int(peaks[k - 1])
        trough = left + int(np.argmin(x[left:peak + 1]))
        if trough < peak:
            rises.append((x[peak] - x[trough]) / ((peak - trough) * hop_s))
        right = x.size - 1 if k == peaks.size - 1 else int(peaks[k + 1])
        trough = peak + int(np.argmin(x[peak:right + 1]))
        if trough > peak:
            falls.append((x[trough] - x[peak]) / ((trough - peak) * hop_s))

    rise = np.asarray(rises)
    fall = np.asarray(falls)
    return LoudnessDynamics(
        rise_slope_mean=float(rise.mean()) if rise.size else 0.0,
        rise_slope_std=float(rise.std()) if rise.size else 0.0,
        fall_slope_mean=float(fall.mean()) if fall.size else 0.0,
        fall_slope_std=float(fall.std()) if fall.size else 0.0,
        peaks_per_sec=peaks.size / (x.size * hop_s),
        n_peaks=int(peaks.size),
    )
