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

"""WAV decoding, resampling and short-time framing."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.signal import get_window

from .errors import EmptyPayload, MalformedHeader, SignalTooShort, UnsupportedEncoding


WindowKind = Literal["hann", "hamming", "rect"]
WavEncoding = Literal["pcm16", "float32"]

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE
PCM16_SCALE = 32768.0

_SCIPY_WINDOW_NAMES = {"hann": "hann", "hamming": "hamming", "rect": "boxcar"}


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def scaled(self, factor: float) -> "AudioBuffer":
        return AudioBuffer(np.clip(self.samples * factor, -1.0, 1.0), self.sample_rate)


@dataclass(frozen=True)
class FrameSequence:
    frames: np.ndarray
    frame_len_samples: int
    hop_samples: int
    sample_rate: int
    window_kind: str

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def hop_s(self) -> float:
        return self.hop_samples / self.sample_rate


def _iter_chunks(data: bytes):
    offset = 12
    while offset + 8 <= len(data):
        chunk_id, size = struct.unpack_from("<4sI", data, offset)
        body_start = offset + 8
        yield chunk_id, data[body_start:body_start + size]
        # chunks are word aligned
        offset = body_start + size + (size & 1)


def load_wav(data: bytes) -> AudioBuffer:
    """Decode a RIFF/WAVE byte string (PCM16 or float32, mono or stereo) to mono [-1, 1]."""
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader("Not a RIFF/WAVE container")

    fmt = None
    payload = None
    for chunk_id, body in _iter_chunks(data):
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedHeader("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE and len(body) >= 26:
                # the sub-format GUID starts with the plain format code
                sub_format = struct.unpack_from("<H", body, 24)[0]
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data" and payload is None:
            payload = body
    if fmt is None:
        raise MalformedHeader("Missing fmt chunk")
    if payload is None:
        raise MalformedHeader("Missing data chunk")

    format_code, channels, sample_rate, _, block_align, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels; only mono and stereo are supported")
    if sample_rate <= 0:
        raise MalformedHeader(f"Invalid sample rate {sample_rate}")
    if format_code == WAVE_FORMAT_PCM and bits == 16:
        dtype = np.dtype("<i2")
    elif format_code == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype = np.dtype("<f4")
    else:
        raise UnsupportedEncoding(f"format code {format_code:#06x} with {bits} bits per sample")

    frame_bytes = dtype.itemsize * channels
    n_frames = len(payload) // frame_bytes
    if n_frames == 0:
        raise EmptyPayload("WAV data chunk holds no samples")

    raw = np.frombuffer(payload[:n_frames * frame_bytes], dtype=dtype).astype(np.float64)
    if dtype.kind == "i":
        raw /= PCM16_SCALE
    samples = raw.reshape(n_frames, channels).mean(axis=1)
    return AudioBuffer(np.clip(samples, -1.0, 1.0), int(sample_rate))


def read_wav(path: str | Path) -> AudioBuffer:
    return load_wav(Path(path).read_bytes())


def write_wav(buf: AudioBuffer, encoding: WavEncoding = "pcm16") -> bytes:
    """Encode a mono buffer as a canonical 44-byte-header WAV file."""
    if encoding == "pcm16":
        ints = np.clip(np.round(buf.samples * PCM16_SCALE), -32768, 32767).astype("<i2")
        payload = ints.tobytes()
        format_code, bits = WAVE_FORMAT_PCM, 16
    elif encoding == "float32":
        payload = np.asarray(buf.samples, dtype="<f4").tobytes()
        format_code, bits = WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"Unknown WAV encoding: {encoding}")

    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        format_code,
        1,
        buf.sample_rate,
        buf.sample_rate * block_align,
        block_align,
        bits,
        b"data",
        len(payload),
    )
    return header + payload


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Linear-interpolation resampling; identity when the rate already matches."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    n_in = len(buf.samples)
    n_out = max(1, int(round(n_in * target_rate / buf.sample_rate)))
    positions = np.arange(n_out) * (buf.sample_rate / target_rate)
    samples = np.interp(positions, np.arange(n_in), buf.samples)
    return AudioBuffer(samples, int(target_rate))


def frame_signal(buf: AudioBuffer, frame_ms: float, hop_ms: float, window_kind: WindowKind = "hann") -> FrameSequence:
    """Cut the buffer into windowed frames; frame i starts at i * hop, the tail is zero padded."""
    if not (frame_ms >= hop_ms > 0):
        raise ValueError(f"Need frame_ms >= hop_ms > 0, got frame_ms={frame_ms}, hop_ms={hop_ms}")
    if window_kind not in _SCIPY_WINDOW_NAMES:
        raise ValueError(f"Unknown window kind: {window_kind}")

    frame_len = int(round(frame_ms * buf.sample_rate / 1000.0))
    hop = max(1, int(round(hop_ms * buf.sample_rate / 1000.0)))
    n_samples = len(buf.samples)
    if n_samples < frame_len:
        raise SignalTooShort(
            f"{n_samples} samples is shorter than one {frame_ms} ms frame ({frame_len} samples)"
        )

    n_frames = math.ceil(n_samples / hop)
    padded = np.zeros((n_frames - 1) * hop + frame_len)
    padded[:n_samples] = buf.samples
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_len)[::hop][:n_frames]
    window = get_window(_SCIPY_WINDOW_NAMES[window_kind], frame_len)
    return FrameSequence(
        frames=frames * window,
        frame_len_samples=frame_len,
        hop_samples=hop,
        sample_rate=buf.sample_rate,
        window_kind=window_kind,
    )
