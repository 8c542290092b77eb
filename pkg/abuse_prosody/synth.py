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

"""Seeded synthetic corpora standing in for a real multilingual recording set.

Audio corpus: each clip is a sequence of voiced bursts (an impulse train
shaped by a glottal low-pass and three formant resonators) separated by
near-silence. Abusive clips are louder, have more bursts per second and a
higher pitch; every language shifts pitch, tempo and formants a little.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from .audio_io import AudioBuffer, write_wav
from .config import CANONICAL_SAMPLE_RATE, DEFAULT_SEED, MANIFEST_NAME, TRAIN_FRACTION
from .dataset import ABUSIVE, NON_ABUSIVE
from .features import FEATURE_NAMES
from .store import LABEL_NAMES, FeatureStore, ManifestRecord, write_manifest

DEFAULT_LANGUAGES: Tuple[str, ...] = (
    "bengali",
    "bhojpuri",
    "gujarati",
    "haryanvi",
    "hindi",
    "kannada",
    "malayalam",
    "odia",
    "punjabi",
    "tamil",
)

GLOTTAL_POLE = 0.97
NOISE_FLOOR = 3e-4
MIN_GAP_S = 0.12


@dataclass(frozen=True)
class LanguageProfile:
    name: str
    f0_hz: float
    formants_hz: Tuple[float, float, float]
    tempo: float


@dataclass(frozen=True)
class ClassProfile:
    amplitude: Tuple[float, float]
    bursts_per_sec: float
    f0_scale: float
    burst_len_s: Tuple[float, float]


CLASS_PROFILES: Dict[int, ClassProfile] = {
    ABUSIVE: ClassProfile(amplitude=(0.3, 0.6), bursts_per_sec=2.2, f0_scale=1.3, burst_len_s=(0.12, 0.25)),
    NON_ABUSIVE: ClassProfile(amplitude=(0.05, 0.1), bursts_per_sec=1.2, f0_scale=1.0, burst_len_s=(0.15, 0.3)),
}


def language_profile(index: int, name: str) -> LanguageProfile:
    return LanguageProfile(
        name=name,
        f0_hz=115.0 + 9.0 * index,
        formants_hz=(620.0 + 15.0 * index, 1150.0 + 25.0 * index, 2450.0 + 20.0 * index),
        tempo=1.0 + 0.02 * (index - 4.5),
    )


def resonator(signal: np.ndarray, freq_hz: float, bandwidth_hz: float, sample_rate: int) -> np.ndarray:
    """Two-pole resonator with unit gain at DC."""
    radius = np.exp(-np.pi * bandwidth_hz / sample_rate)
    theta = 2.0 * np.pi * freq_hz / sample_rate
    a = [1.0, -2.0 * radius * np.cos(theta), radius ** 2]
    return lfilter([sum(a)], a, signal)


def voiced_burst(
    rng: np.random.Generator,
    n_samples: int,
    f0_hz: float,
    formants_hz: Sequence[float],
    sample_rate: int,
) -> np.ndarray:
    """Unit-peak vowel-like burst with a slow pitch glide and a Hann envelope."""
    glide = np.linspace(1.0, 1.0 + rng.uniform(-0.08, 0.08), n_samples)
    phase = np.cumsum(f0_hz * glide / sample_rate)
    pulses = np.zeros(n_samples)
    pulses[np.flatnonzero(np.diff(np.floor(phase), prepend=0.0) > 0)] = 1.0
    source = lfilter([1.0], [1.0, -GLOTTAL_POLE], pulses)
    for freq, bandwidth in zip(formants_hz, (80.0, 100.0, 120.0)):
        source = resonator(source, freq, bandwidth, sample_rate)
    burst = source * np.hanning(n_samples)
    peak = np.max(np.abs(burst))
    return burst / peak if peak > 0 else burst


def synthesize_clip(
    rng: np.random.Generator,
    language: LanguageProfile,
    label: int,
    duration_s: float = 2.0,
    sample_rate: int = CANONICAL_SAMPLE_RATE,
) -> AudioBuffer:
    profile = CLASS_PROFILES[label]
    n_total = int(round(duration_s * sample_rate))
    samples = rng.normal(0.0, NOISE_FLOOR, n_total)
    amplitude = rng.uniform(*profile.amplitude)
    rate = profile.bursts_per_sec * language.tempo
    mean_len = float(np.mean(profile.burst_len_s))
    # mean gap so that bursts arrive at `rate` per second on average
    mean_gap = max(MIN_GAP_S, 1.0 / rate - mean_len)

    position = int(rng.uniform(0.0, mean_gap) * sample_rate)
    while True:
        burst_len = int(rng.uniform(*profile.burst_len_s) * sample_rate)
        if position + burst_len > n_total:
            break
        f0 = language.f0_hz * profile.f0_scale * rng.uniform(0.95, 1.05)
        formants = [freq * rng.uniform(0.97, 1.03) for freq in language.formants_hz]
        samples[position:position + burst_len] += amplitude * voiced_burst(rng, burst_len, f0, formants, sample_rate)
        gap = MIN_GAP_S + rng.exponential(mean_gap - MIN_GAP_S)
        position += burst_len + int(gap * sample_rate)
    return AudioBuffer(np.clip(samples, -1.0, 1.0), sample_rate)


def split_labels(n: int, rng: np.random.Generator, train_fraction: float = TRAIN_FRACTION) -> np.ndarray:
    """Exactly round(train_fraction * n) of n items go to train, in seeded order."""
    n_train = int(round(train_fraction * n))
    splits = np.array(["test"] * n, dtype=object)
    splits[rng.permutation(n)[:n_train]] = "train"
    return splits


def generate_corpus(
    out_dir: str | Path,
    languages: Sequence[str] = DEFAULT_LANGUAGES,
    clips_per_language: int = 100,
    duration_s: float = 2.0,
    seed: int = DEFAULT_SEED,
    train_fraction: float = TRAIN_FRACTION,
) -> Tuple[Path, List[ManifestRecord]]:
    """Write WAV clips under out_dir/audio/<language>/ and a manifest; returns (manifest path, records).

    Classes are balanced within each language and split 70:30 per class.
    """
    out_dir = Path(out_dir)
    records: List[ManifestRecord] = []
    for lang_idx, name in enumerate(languages):
        profile = language_profile(lang_idx, name)
        labels = np.array([ABUSIVE if k % 2 == 0 else NON_ABUSIVE for k in range(clips_per_language)])
        splits = np.empty(clips_per_language, dtype=object)
        split_rng = np.random.default_rng(np.random.SeedSequence([seed, lang_idx]))
        for label in (ABUSIVE, NON_ABUSIVE):
            members = np.flatnonzero(labels == label)
            splits[members] = split_labels(members.size, split_rng, train_fraction)

        audio_dir = out_dir / "audio" / name
        audio_dir.mkdir(parents=True, exist_ok=True)
        for k in range(clips_per_language):
            rng = np.random.default_rng(np.random.SeedSequence([seed, lang_idx, k]))
            clip = synthesize_clip(rng, profile, int(labels[k]), duration_s)
            record_id = f"{name}_{k:04d}"
            path = audio_dir / f"{record_id}.wav"
            path.write_bytes(write_wav(clip, "pcm16"))
            records.append(
                ManifestRecord(record_id, path, name, LABEL_NAMES[int(labels[k])], str(splits[k]), len(records) + 2)
            )
        print(f"Synthesized {clips_per_language} clips for {name}")

    manifest_path = write_manifest(records, out_dir / MANIFEST_NAME)
    return manifest_path, records


def synthetic_feature_store(
    languages: Sequence[str] = DEFAULT_LANGUAGES,
    rows_per_class: int = 40,
    informative: Sequence[str] = ("loudness_mean", "voiced_segments_per_sec"),
    shift: float = 3.0,
    shifted_languages: Optional[Sequence[str]] = None,
    seed: int = DEFAULT_SEED,
    feature_names: Sequence[str] = FEATURE_NAMES,
    train_fraction: float = TRAIN_FRACTION,
) -> FeatureStore:
    """Feature-level corpus: standard-normal columns, abusive rows shifted by `shift` sigma
    on the informative columns in every language listed in shifted_languages (default: all).
    """
    rng = np.random.default_rng(seed)
    shifted = set(languages if shifted_languages is None else shifted_languages)
    columns = [list(feature_names).index(name) for name in informative]

    ids, langs, labels, splits, blocks = [], [], [], [], []
    for name in languages:
        for label in (ABUSIVE, NON_ABUSIVE):
            block = rng.normal(0.0, 1.0, size=(rows_per_class, len(feature_names)))
            if label == ABUSIVE and name in shifted:
                block[:, columns] += shift
            blocks.append(block)
            splits.extend(split_labels(rows_per_class, rng, train_fraction))
            for k in range(rows_per_class):
                ids.append(f"{name}_{LABEL_NAMES[label]}_{k:03d}")
                langs.append(name)
                labels.append(label)
    return FeatureStore(ids, langs, labels, splits, np.vstack(blocks), tuple(feature_names))
