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

"""Shared signal synthesizers and small corpora for the test suite."""

import os
import sys

import numpy as np
import pytest
from scipy.signal import lfilter

_PARENT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _PARENT_DIR not in sys.path:
    sys.path.insert(0, _PARENT_DIR)

from abuse_prosody.audio_io import AudioBuffer  # noqa: E402
from abuse_prosody.synth import resonator  # noqa: E402

SR = 16000


def sine(freq_hz, duration_s=1.0, amplitude=1.0, sample_rate=SR):
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    return AudioBuffer(amplitude * np.sin(2.0 * np.pi * freq_hz * t), sample_rate)


def vowel(
    f0_hz=120.0,
    formants=(700.0, 1200.0, 2600.0),
    bandwidths=(80.0, 100.0, 120.0),
    duration_s=1.0,
    peak=0.5,
    sample_rate=SR,
):
    """Impulse train through a glottal pole and three resonators (an all-pole vowel after pre-emphasis)."""
    n = int(round(duration_s * sample_rate))
    pulses = np.zeros(n)
    pulses[::int(round(sample_rate / f0_hz))] = 1.0
    signal = lfilter([1.0], [1.0, -0.97], pulses)
    for freq, bandwidth in zip(formants, bandwidths):
        signal = resonator(signal, freq, bandwidth, sample_rate)
    return AudioBuffer(peak * signal / np.max(np.abs(signal)), sample_rate)


def jittered_sine(f0_hz=200.0, jitter_sigma=0.02, duration_s=1.0, seed=7, sample_rate=SR):
    """Sine whose every cycle length is drawn from N(P0, (sigma * P0)^2), via phase accumulation."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    base_period = sample_rate / f0_hz
    periods = base_period * (1.0 + jitter_sigma * rng.standard_normal(n // int(base_period) + 8))
    phase = np.empty(n)
    acc = 0.0
    for i in range(n):
        phase[i] = acc
        acc += 1.0 / periods[int(acc)]
    return AudioBuffer(0.8 * np.sin(2.0 * np.pi * phase), sample_rate)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tone():
    return sine


@pytest.fixture
def vowel_buffer():
    return vowel()


@pytest.fixture
def silence():
    return AudioBuffer(np.zeros(SR), SR)
