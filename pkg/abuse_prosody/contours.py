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

"""Low-level descriptor contours computed frame by frame."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import librosa
import numpy as np
from scipy.fft import dct, irfft, next_fast_len, rfft
from scipy.linalg import LinAlgError, solve_toeplitz
from scipy.signal import lfilter

from .audio_io import AudioBuffer, FrameSequence
from .config import (
    F0_MAX_HZ,
    F0_MIN_HZ,
    F0_REFERENCE_HZ,
    FORMANT_MAX_BANDWIDTH_HZ,
    FORMANT_MAX_HZ,
    FORMANT_MIN_HZ,
    HOP_MS,
    LOUDNESS_EXPONENT,
    LPC_ORDER,
    MEL_FMAX_HZ,
    MEL_FMIN_HZ,
    N_FORMANTS,
    N_MEL_BANDS,
    N_MFCC,
    OCTAVE_PREFERENCE,
    PITCH_FRAME_MS,
    PRE_EMPHASIS,
    RMS_FLOOR_DB,
    SILENCE_FLOOR_DBFS,
    VOICING_THRESHOLD,
)


@dataclass
class ContourSet:
    f0_semitones: np.ndarray
    voiced: np.ndarray
    loudness: np.ndarray
    flux: np.ndarray
    jitter_local: np.ndarray
    shimmer_local_db: np.ndarray
    # (T, 3); NaN where a frame has no formant estimate
    formant_freq: np.ndarray
    formant_amp_rel: np.ndarray
    mfcc: np.ndarray
    rms_db: np.ndarray
    frame_hop_s: float
    # voiced frames whose whole pitch window lies above the silence floor;
    # voiced-only functionals read this mask
    steady: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.steady is None:
            self.steady = self.voiced.copy()

    def __len__(self) -> int:
        return int(self.voiced.shape[0])


def semitones_to_hz(semitones: np.ndarray | float) -> np.ndarray | float:
    return F0_REFERENCE_HZ * np.power(2.0, np.asarray(semitones) / 12.0)


def hz_to_semitones(hz: np.ndarray | float) -> np.ndarray | float:
    return 12.0 * np.log2(np.asarray(hz) / F0_REFERENCE_HZ)


def _fft_size(frame_len: int) -> int:
    return 1 << max(0, int(frame_len - 1).bit_length())


def _frame_rms_db(frames: np.ndarray) -> np.ndarray:
    rms = np.sqrt(np.mean(frames ** 2, axis=1))
    floor = 10.0 ** (RMS_FLOOR_DB / 20.0)
    return 20.0 * np.log10(np.maximum(rms, floor))


def _parabolic_peak(y0: float, y1: float, y2: float) -> Tuple[float, float]:
    """Offset in (-0.5, 0.5) and height of the parabola through three equally spaced points."""
    curvature = y0 - 2.0 * y1 + y2
    if curvature >= 0.0:
        return 0.0, y1
    delta = float(np.clip(0.5 * (y0 - y2) / curvature, -0.5, 0.5))
    return delta, y1 - 0.25 * (y0 - y2) * delta


def _normalized_autocorrelation(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """r[t, k] = sum x[n] x[n+k] / sqrt(E(head) E(tail)) for k in [0, max_lag]."""
    n = frames.shape[1]
    n_fft = next_fast_len(2 * n)
    spectrum = rfft(frames, n_fft, axis=1)
    acf = irfft(np.abs(spectrum) ** 2, n_fft, axis=1)[:, :max_lag + 1]
    energy = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames ** 2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    head = energy[:, n - lags]
    tail = energy[:, n:n + 1] - energy[:, lags]
    denom = np.sqrt(head * tail)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 1e-12, acf / denom, 0.0)


def compute_f0(
    frames: FrameSequence,
    f0_min_hz: float = F0_MIN_HZ,
    f0_max_hz: float = F0_MAX_HZ,
    voicing_threshold: float = VOICING_THRESHOLD,
    silence_floor_dbfs: float = SILENCE_FLOOR_DBFS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Autocorrelation pitch tracker.

    Returns (f0 in semitones above 27.5 Hz, voiced flags); unvoiced frames carry 0.
    """
    raw = frames.frames
    n_frames, frame_len = raw.shape
    sr = frames.sample_rate
    lag_min = max(2, int(np.floor(sr / f0_max_hz)))
    lag_max = min(frame_len - 2, int(np.ceil(sr / f0_min_hz)))

    centered = raw - raw.mean(axis=1, keepdims=True)
    nacf = _normalized_autocorrelation(centered, lag_max + 1)
    level_db = _frame_rms_db(raw)

    f0_semitones = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    for t in range(n_frames):
        if level_db[t] <= silence_floor_dbfs:
            continue
        r = nacf[t]
        body = r[lag_min:lag_max + 1]
        is_peak = (body > r[lag_min - 1:lag_max]) & (body >= r[lag_min + 1:lag_max + 2])
        peak_lags = np.flatnonzero(is_peak) + lag_min
        if peak_lags.size == 0:
            continue
        best = r[peak_lags].max()
        if best <= voicing_threshold:
            continue
        lag = int(peak_lags[np.argmax(r[peak_lags] >= OCTAVE_PREFERENCE * best)])
        delta, height = _parabolic_peak(r[lag - 1], r[lag], r[lag + 1])
        if height <= voicing_threshold:
            continue
        f0_semitones[t] = hz_to_semitones(sr / (lag + delta))
        voiced[t] = True
    return f0_semitones, voiced


@lru_cache(maxsize=16)
def _mel_filterbank(sample_rate: int, n_fft: int, n_mels: int, fmin: float, fmax: float) -> np.ndarray:
    return librosa.filters.mel(
        sr=sample_rate,
        n_fft=n_fft,
        n_mels=n_mels,
        fmin=fmin,
        fmax=min(fmax, sample_rate / 2.0),
        htk=True,
        norm=None,
        dtype=np.float64,
    )


def _mel_band_power(
    frames: FrameSequence,
    n_mels: int = N_MEL_BANDS,
    fmin: float = MEL_FMIN_HZ,
    fmax: float = MEL_FMAX_HZ,
) -> np.ndarray:
    n_fft = _fft_size(frames.frame_len_samples)
    power = np.abs(rfft(frames.frames, n_fft, axis=1)) ** 2 / frames.frame_len_samples
    return power @ _mel_filterbank(frames.sample_rate, n_fft, n_mels, fmin, fmax).T


def compute_loudness(
    frames: FrameSequence,
    n_mels: int = N_MEL_BANDS,
    fmin: float = MEL_FMIN_HZ,
    fmax: float = MEL_FMAX_HZ,
    exponent: float = LOUDNESS_EXPONENT,
) -> np.ndarray:
    """Mel-band power compressed with a 0.33 exponent and summed over bands."""
    bands = _mel_band_power(frames, n_mels, fmin, fmax)
    return np.sum(np.power(np.maximum(bands, 0.0), exponent), axis=1)


def compute_mfcc(
    frames: FrameSequence,
    n_coeffs: int = N_MFCC,
    n_mels: int = N_MEL_BANDS,
    fmin: float = MEL_FMIN_HZ,
    fmax: float = MEL_FMAX_HZ,
) -> np.ndarray:
    """MFCC 1..n_coeffs (DCT-II of log mel power, no liftering); shape (T, n_coeffs)."""
    bands = _mel_band_power(frames, n_mels, fmin, fmax)
    cepstrum = dct(np.log(bands + 1e-10), type=2, norm="ortho", axis=1)
    return cepstrum[:, 1:n_coeffs + 1]


def compute_flux(frames: FrameSequence) -> np.ndarray:
    """Euclidean distance between consecutive unit-norm magnitude spectra; flux[0] = 0."""
    n_fft = _fft_size(frames.frame_len_samples)
    magnitude = np.abs(rfft(frames.frames, n_fft, axis=1))
    norms = np.linalg.norm(magnitude, axis=1, keepdims=True)
    unit = np.divide(magnitude, norms, out=np.zeros_like(magnitude), where=norms > 0)
    flux = np.zeros(len(frames))
    if len(frames) > 1:
        flux[1:] = np.linalg.norm(unit[1:] - unit[:-1], axis=1)
    return flux


def compute_rms_db(frames: FrameSequence) -> np.ndarray:
    return _frame_rms_db(frames.frames)


def _formant_sentinel() -> np.ndarray:
    return np.full((N_FORMANTS, 2), np.nan)


def compute_formants(
    frame: np.ndarray,
    f0_hz: Optional[float],
    sample_rate: int,
    lpc_order: int = LPC_ORDER,
    pre_emphasis: float = PRE_EMPHASIS,
    max_bandwidth_hz: float = FORMANT_MAX_BANDWIDTH_HZ,
    min_hz: float = FORMANT_MIN_HZ,
    max_hz: float = FORMANT_MAX_HZ,
) -> np.ndarray:
    """F1..F3 of one windowed voiced frame from LPC roots.

    Returns a (3, 2) array of (frequency Hz, amplitude dB relative to the F0
    harmonic). Unvoiced frames and frames with fewer than three qualifying
    roots give an all-NaN array.
    """
    if f0_hz is None or not np.isfinite(f0_hz) or f0_hz <= 0:
        return _formant_sentinel()
    x = np.asarray(frame, dtype=np.float64)
    if x.size <= lpc_order + 1:
        return _formant_sentinel()

    emphasized = lfilter([1.0, -pre_emphasis], [1.0], x)
    n = emphasized.size
    r = np.array([np.dot(emphasized[:n - k], emphasized[k:]) for k in range(lpc_order + 1)])
    if r[0] <= 0.0:
        return _formant_sentinel()
    try:
        # Yule-Walker system; solve_toeplitz runs the Levinson-Durbin recursion
        lpc = solve_toeplitz(r[:lpc_order], r[1:lpc_order + 1])
    except (LinAlgError, ValueError):
        return _formant_sentinel()
    if not np.all(np.isfinite(lpc)):
        return _formant_sentinel()

    roots = np.roots(np.concatenate(([1.0], -lpc)))
    roots = roots[roots.imag > 0]
    magnitude = np.abs(roots)
    roots, magnitude = roots[magnitude > 0], magnitude[magnitude > 0]
    freqs = np.angle(roots) * sample_rate / (2.0 * np.pi)
    bandwidths = -np.log(magnitude) * sample_rate / np.pi
    keep = (bandwidths > 0) & (bandwidths < max_bandwidth_hz) & (freqs >= min_hz) & (freqs <= max_hz)
    freqs = np.sort(freqs[keep])
    if freqs.size < N_FORMANTS:
        return _formant_sentinel()
    freqs = freqs[:N_FORMANTS]

    n_fft = _fft_size(n)
    spectrum = np.abs(rfft(x, n_fft))

    def level_at(freq_hz: float) -> float:
        return float(spectrum[min(spectrum.size - 1, int(round(freq_hz * n_fft / sample_rate)))])

    reference = level_at(f0_hz)
    if reference <= 0.0:
        return _formant_sentinel()
    amps = np.array([20.0 * np.log10(max(level_at(freq), 1e-12) / reference) for freq in freqs])
    return np.column_stack([freqs, amps])


def _period_markers(segment: np.ndarray, period: float) -> Tuple[np.ndarray, np.ndarray]:
    """Positive cycle peaks walked out from the largest sample, refined parabolically."""
    n = segment.size
    if n < 2 * period or period < 2:
        return np.empty(0), np.empty(0)
    anchor = int(np.argmax(segment))
    if segment[anchor] <= 0:
        return np.empty(0), np.empty(0)

    indices = [anchor]
    pos = anchor
    while True:
        lo, hi = int(round(pos + 0.8 * period)), int(round(pos + 1.2 * period)) + 1
        if hi > n:
            break
        nxt = lo + int(np.argmax(segment[lo:hi]))
        if segment[nxt] <= 0:
            break
        indices.append(nxt)
        pos = nxt
    pos = anchor
    while True:
        lo, hi = int(round(pos - 1.2 * period)), int(round(pos - 0.8 * period)) + 1
        if lo < 0:
            break
        prev = lo + int(np.argmax(segment[lo:hi]))
        if segment[prev] <= 0:
            break
        indices.append(prev)
        pos = prev

    positions, amplitudes = [], []
    for idx in sorted(indices):
        if 0 < idx < n - 1:
            delta, height = _parabolic_peak(segment[idx - 1], segment[idx], segment[idx + 1])
        else:
            delta, height = 0.0, float(segment[idx])
        positions.append(idx + delta)
        amplitudes.append(height)
    return np.asarray(positions), np.asarray(amplitudes)


def compute_jitter_shimmer(
    buf: AudioBuffer,
    f0_semitones: np.ndarray,
    voiced: np.ndarray,
    frame_ms: float = PITCH_FRAME_MS,
    hop_ms: float = HOP_MS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Local jitter (ratio) and shimmer (dB) per frame from cycle peaks; zero when unvoiced."""
    sr = buf.sample_rate
    frame_len = int(round(frame_ms * sr / 1000.0))
    hop = max(1, int(round(hop_ms * sr / 1000.0)))
    jitter = np.zeros(len(voiced))
    shimmer = np.zeros(len(voiced))
    for t in np.flatnonzero(voiced):
        segment = buf.samples[t * hop:t * hop + frame_len]
        period = sr / float(semitones_to_hz(f0_semitones[t]))
        positions, amplitudes = _period_markers(segment, period)
        if positions.size < 3:
            continue
        periods = np.diff(positions)
        jitter[t] = np.mean(np.abs(np.diff(periods))) / np.mean(periods)
        if np.all(amplitudes > 0):
            shimmer[t] = np.mean(np.abs(20.0 * np.log10(amplitudes[1:] / amplitudes[:-1])))
    return jitter, shimmer


def full_window_frames(
    buf: AudioBuffer,
    n_frames: int,
    frame_ms: float = PITCH_FRAME_MS,
    hop_ms: float = HOP_MS,
    silence_floor_dbfs: float = SILENCE_FLOOR_DBFS,
) -> np.ndarray:
    """True for frames whose every hop-sized block is above the silence floor.

    Frames that straddle an onset, an offset or the zero-padded tail are False.
    """
    sr = buf.sample_rate
    frame_len = int(round(frame_ms * sr / 1000.0))
    hop = max(1, int(round(hop_ms * sr / 1000.0)))
    if n_frames <= 0:
        return np.zeros(0, dtype=bool)
    span = -(-frame_len // hop)
    n_blocks = n_frames - 1 + span
    padded = np.zeros(n_blocks * hop)
    n = min(len(buf.samples), padded.size)
    padded[:n] = buf.samples[:n]
    audible = _frame_rms_db(padded.reshape(n_blocks, hop)) > silence_floor_dbfs
    return np.lib.stride_tricks.sliding_window_view(audible, span)[:n_frames].all(axis=1)
