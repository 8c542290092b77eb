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

"""The 54-feature paralinguistic vector and the contour pipeline behind it."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.signal import get_window

from . import config
from .audio_io import AudioBuffer, FrameSequence, frame_signal, resample
from .contours import (
    ContourSet,
    compute_f0,
    compute_flux,
    compute_formants,
    compute_jitter_shimmer,
    compute_loudness,
    compute_mfcc,
    compute_rms_db,
    full_window_frames,
    semitones_to_hz,
)
from .errors import ConfigError, SignalTooShort
from .functionals import FunctionalSummary, apply_functionals, loudness_dynamics, masked_mean, segment_voicing


_SIX = ("mean", "std", "p20", "p50", "p80", "pctl_range")

FEATURE_NAMES: Tuple[str, ...] = tuple(
    [f"loudness_{stat}" for stat in _SIX]
    + [f"f0_{stat}" for stat in _SIX]
    + [f"flux_{stat}" for stat in _SIX]
    + ["jitter_mean", "jitter_std", "shimmer_mean", "shimmer_std"]
    + [f"f{i}_freq_{stat}" for i in (1, 2, 3) for stat in ("mean", "std")]
    + [f"f{i}_amp_{stat}" for i in (1, 2, 3) for stat in ("mean", "std")]
    + [f"mfcc{i}_{stat}" for i in (1, 2, 3, 4) for stat in ("mean", "std")]
    + ["flux_voiced_mean", "flux_unvoiced_mean"]
    + [
        "loudness_rise_slope_mean",
        "loudness_rise_slope_std",
        "loudness_fall_slope_mean",
        "loudness_fall_slope_std",
        "loudness_peaks_per_sec",
    ]
    + [
        "voiced_segments_per_sec",
        "voiced_segment_len_mean",
        "voiced_segment_len_std",
        "unvoiced_segment_len_mean",
    ]
    + ["rms_db_mean"]
)
N_FEATURES = len(FEATURE_NAMES)

# Meaningful in every language of the reference corpus.
IMPORTANT_FEATURE_NAMES: Tuple[str, ...] = (
    "loudness_mean",
    "loudness_p50",
    "loudness_p80",
    "loudness_pctl_range",
    "loudness_rise_slope_mean",
    "loudness_rise_slope_std",
    "loudness_fall_slope_mean",
    "loudness_fall_slope_std",
    "f1_amp_mean",
    "f2_amp_mean",
    "f3_amp_mean",
    "flux_mean",
    "flux_voiced_mean",
    "flux_unvoiced_mean",
    "loudness_peaks_per_sec",
    "voiced_segments_per_sec",
    "voiced_segment_len_mean",
    "rms_db_mean",
)

# Fallback flags
FLAG_SHORT_RECORDING = "short_recording"
FLAG_NO_VOICED_FRAMES = "empty_voiced_functionals"
FLAG_NO_FORMANTS = "empty_formant_functionals"
FLAG_NO_LOUDNESS_PEAKS = "no_loudness_peaks"
FLAG_NON_FINITE = "non_finite_replaced"

MIN_RECOMMENDED_DURATION_S = 1.0


@dataclass(frozen=True)
class ExtractionConfig:
    sample_rate: int = config.CANONICAL_SAMPLE_RATE
    spectral_frame_ms: float = config.SPECTRAL_FRAME_MS
    pitch_frame_ms: float = config.PITCH_FRAME_MS
    hop_ms: float = config.HOP_MS
    spectral_window: str = config.SPECTRAL_WINDOW
    pitch_window: str = config.PITCH_WINDOW
    f0_min_hz: float = config.F0_MIN_HZ
    f0_max_hz: float = config.F0_MAX_HZ
    voicing_threshold: float = config.VOICING_THRESHOLD
    silence_floor_dbfs: float = config.SILENCE_FLOOR_DBFS
    n_mel_bands: int = config.N_MEL_BANDS
    mel_fmin_hz: float = config.MEL_FMIN_HZ
    mel_fmax_hz: float = config.MEL_FMAX_HZ
    loudness_exponent: float = config.LOUDNESS_EXPONENT
    lpc_order: int = config.LPC_ORDER
    pre_emphasis: float = config.PRE_EMPHASIS
    formant_max_bandwidth_hz: float = config.FORMANT_MAX_BANDWIDTH_HZ
    peak_relative_threshold: float = config.PEAK_RELATIVE_THRESHOLD

    def __post_init__(self) -> None:
        if not self.spectral_frame_ms >= self.hop_ms > 0 or not self.pitch_frame_ms >= self.hop_ms:
            raise ConfigError(
                f"frame sizes must be >= hop > 0 (spectral={self.spectral_frame_ms}, "
                f"pitch={self.pitch_frame_ms}, hop={self.hop_ms})"
            )
        if not 0 < self.f0_min_hz < self.f0_max_hz < self.sample_rate / 2:
            raise ConfigError(f"invalid F0 range [{self.f0_min_hz}, {self.f0_max_hz}] Hz")

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]]) -> "ExtractionConfig":
        if not values:
            return cls()
        known = {field.name: field.type for field in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"Unknown extraction parameter(s): {', '.join(unknown)}")
        defaults = cls()
        coerced = {}
        for key, value in values.items():
            kind = type(getattr(defaults, key))
            try:
                coerced[key] = kind(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"extraction.{key}: cannot read {value!r} as {kind.__name__}") from exc
        return cls(**coerced)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    names: Tuple[str, ...] = FEATURE_NAMES
    flags: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.values) != len(self.names):
            raise ValueError(f"{len(self.values)} values for {len(self.names)} feature names")

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> Dict[str, float]:
        return {name: float(value) for name, value in zip(self.names, self.values)}


def _frame_on_grid(
    signal: AudioBuffer, frame_ms: float, hop_ms: float, window: str, n_frames: int
) -> FrameSequence:
    """Frame a buffer, zero-padding one shorter than the frame, and keep the first n_frames."""
    frame_len = int(round(frame_ms * signal.sample_rate / 1000.0))
    if len(signal.samples) < frame_len:
        padded = np.zeros(frame_len)
        padded[: len(signal.samples)] = signal.samples
        signal = AudioBuffer(padded, signal.sample_rate)
    frames = frame_signal(signal, frame_ms, hop_ms, window)
    return replace(frames, frames=frames.frames[:n_frames])


def compute_contours(buf: AudioBuffer, cfg: Optional[ExtractionConfig] = None) -> ContourSet:
    """Run every low-level descriptor on the canonical-rate signal.

    All contours share one frame grid: frame t starts at t * hop for each
    frame length, so the 25 ms and 60 ms pipelines have equal length T.
    """
    cfg = cfg or ExtractionConfig()
    signal = resample(buf, cfg.sample_rate)

    if len(signal.samples) == 0:
        raise SignalTooShort("cannot extract features from an empty buffer")
    hop = max(1, int(round(cfg.hop_ms * cfg.sample_rate / 1000.0)))
    n_grid = -(-len(signal.samples) // hop)

    spectral = _frame_on_grid(signal, cfg.spectral_frame_ms, cfg.hop_ms, cfg.spectral_window, n_grid)
    pitch = _frame_on_grid(signal, cfg.pitch_frame_ms, cfg.hop_ms, cfg.pitch_window, n_grid)
    energy = _frame_on_grid(signal, cfg.spectral_frame_ms, cfg.hop_ms, "rect", n_grid)

    f0_semitones, voiced = compute_f0(
        pitch,
        f0_min_hz=cfg.f0_min_hz,
        f0_max_hz=cfg.f0_max_hz,
        voicing_threshold=cfg.voicing_threshold,
        silence_floor_dbfs=cfg.silence_floor_dbfs,
    )
    mel_args = dict(n_mels=cfg.n_mel_bands, fmin=cfg.mel_fmin_hz, fmax=cfg.mel_fmax_hz)
    loudness = compute_loudness(spectral, exponent=cfg.loudness_exponent, **mel_args)
    mfcc = compute_mfcc(spectral, n_coeffs=config.N_MFCC, **mel_args)
    flux = compute_flux(spectral)
    rms_db = compute_rms_db(energy)
    jitter, shimmer = compute_jitter_shimmer(signal, f0_semitones, voiced, cfg.pitch_frame_ms, cfg.hop_ms)
    steady = voiced & full_window_frames(
        signal, len(voiced), cfg.pitch_frame_ms, cfg.hop_ms, cfg.silence_floor_dbfs
    )

    n_frames = len(voiced)
    formant_freq = np.full((n_frames, config.N_FORMANTS), np.nan)
    formant_amp = np.full((n_frames, config.N_FORMANTS), np.nan)
    # formants run on the pitch-frame grid, re-windowed with Hamming
    hamming = get_window("hamming", pitch.frame_len_samples)
    for t in np.flatnonzero(voiced):
        estimate = compute_formants(
            pitch.frames[t] * hamming,
            float(semitones_to_hz(f0_semitones[t])),
            cfg.sample_rate,
            lpc_order=cfg.lpc_order,
            pre_emphasis=cfg.pre_emphasis,
            max_bandwidth_hz=cfg.formant_max_bandwidth_hz,
        )
        formant_freq[t] = estimate[:, 0]
        formant_amp[t] = estimate[:, 1]

    return ContourSet(
        f0_semitones=f0_semitones,
        voiced=voiced,
        loudness=loudness,
        flux=flux,
        jitter_local=jitter,
        shimmer_local_db=shimmer,
        formant_freq=formant_freq,
        formant_amp_rel=formant_amp,
        mfcc=mfcc,
        rms_db=rms_db,
        frame_hop_s=spectral.hop_s,
        steady=steady,
    )


def _mean_std(summary: FunctionalSummary) -> List[float]:
    return [summary.mean, summary.std]


def features_from_contours(contours: ContourSet, cfg: Optional[ExtractionConfig] = None) -> FeatureVector:
    cfg = cfg or ExtractionConfig()
    voiced = contours.voiced
    steady = contours.steady
    flags: List[str] = []

    f0 = apply_functionals(contours.f0_semitones, steady)
    if f0.is_empty:
        flags.append(FLAG_NO_VOICED_FRAMES)

    formant_freq = [apply_functionals(contours.formant_freq[:, i], steady) for i in range(config.N_FORMANTS)]
    formant_amp = [apply_functionals(contours.formant_amp_rel[:, i], steady) for i in range(config.N_FORMANTS)]
    if not f0.is_empty and all(summary.is_empty for summary in formant_freq):
        flags.append(FLAG_NO_FORMANTS)

    dynamics = loudness_dynamics(contours.loudness, contours.frame_hop_s, cfg.peak_relative_threshold)
    if dynamics.n_peaks == 0:
        flags.append(FLAG_NO_LOUDNESS_PEAKS)
    voicing = segment_voicing(voiced, contours.frame_hop_s)

    values: List[float] = []
    values += apply_functionals(contours.loudness).as_tuple()
    values += f0.as_tuple()
    values += apply_functionals(contours.flux).as_tuple()
    values += _mean_std(apply_functionals(contours.jitter_local, steady))
    values += _mean_std(apply_functionals(contours.shimmer_local_db, steady))
    for summary in formant_freq:
        values += _mean_std(summary)
    for summary in formant_amp:
        values += _mean_std(summary)
    for i in range(contours.mfcc.shape[1]):
        values += _mean_std(apply_functionals(contours.mfcc[:, i]))
    values += [masked_mean(contours.flux, voiced), masked_mean(contours.flux, ~voiced)]
    values += [
        dynamics.rise_slope_mean,
        dynamics.rise_slope_std,
        dynamics.fall_slope_mean,
        dynamics.fall_slope_std,
        dynamics.peaks_per_sec,
    ]
    values += [
        voicing.voiced_per_sec,
        voicing.mean_voiced_len,
        voicing.std_voiced_len,
        voicing.mean_unvoiced_len,
    ]
    values.append(masked_mean(contours.rms_db))

    vector = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(vector)):
        flags.append(FLAG_NON_FINITE)
        vector = np.where(np.isfinite(vector), vector, 0.0)
    return FeatureVector(values=vector, names=FEATURE_NAMES, flags=tuple(flags))


def extract_features(buf: AudioBuffer, cfg: Optional[ExtractionConfig] = None) -> FeatureVector:
    """Decode-independent entry point: AudioBuffer in, 54 finite features out."""
    cfg = cfg or ExtractionConfig()
    vector = features_from_contours(compute_contours(buf, cfg), cfg)
    if buf.duration_s < MIN_RECOMMENDED_DURATION_S:
        vector = FeatureVector(vector.values, vector.names, (FLAG_SHORT_RECORDING,) + vector.flags)
    return vector
