"""Uncompressed 16-bit PCM WAV reading and writing.

Hand-rolled RIFF chunk walk instead of the stdlib ``wave`` module so that
rejections (float encodings, odd bit depths, truncated data chunks) raise
:class:`ParseError` with a precise reason, and so unknown chunks are
skipped rather than fatal.  Output headers are canonical 44-byte RIFF;
the sample payload round-trips byte-for-byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import ParseError

_FORMAT_NAMES = {
    0x0002: "ADPCM",
    0x0003: "IEEE float",
    0x0006: "A-law",
    0x0007: "mu-law",
    0x0055: "MP3",
    0xFFFE: "extensible",
}


@dataclass(eq=False)
class AudioBuffer:
    """Interleaved signed 16-bit samples at a fixed rate.

    ``samples`` is a 1-D int16 array; frame ``f`` occupies indices
    ``[f * channels, (f + 1) * channels)``.
    """

    sample_rate: int
    channels: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if self.channels not in (1, 2):
            raise ValueError(f"channels must be 1 or 2, got {self.channels}")
        self.samples = np.asarray(self.samples, dtype=np.int16)
        if self.samples.ndim != 1:
            raise ValueError("samples must be a flat interleaved array")
        if len(self.samples) % self.channels:
            raise ValueError(
                f"{len(self.samples)} samples is not a whole number of "
                f"{self.channels}-channel frames")

    @property
    def n_frames(self) -> int:
        return len(self.samples) // self.channels

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.n_frames / self.sample_rate

    def copy(self) -> "AudioBuffer":
        return AudioBuffer(self.sample_rate, self.channels, self.samples.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AudioBuffer):
            return NotImplemented
        return (self.sample_rate == other.sample_rate
                and self.channels == other.channels
                and np.array_equal(self.samples, other.samples))


def read_wav(data: bytes, *, source: str = "wav") -> AudioBuffer:
    """Parse a RIFF/WAVE byte string.

    Only PCM (format code 1), 16 bits per sample, 1 or 2 channels is
    accepted; anything else raises :class:`ParseError`.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError("not a RIFF/WAVE file", source=source)

    fmt: tuple | None = None
    payload: bytes | None = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if len(body) < chunk_size:
            kind = "data chunk" if chunk_id == b"data" else f"{chunk_id!r} chunk"
            raise ParseError(
                f"truncated {kind}: header declares {chunk_size} bytes, "
                f"{len(body)} present", source=source)
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise ParseError(f"fmt chunk too small ({chunk_size} bytes)", source=source)
            fmt = struct.unpack_from("<HHIIHH", body)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise ParseError("missing fmt chunk", source=source)
    if payload is None:
        raise ParseError("missing data chunk", source=source)

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        name = _FORMAT_NAMES.get(audio_format, f"format code {audio_format}")
        raise ParseError(f"unsupported encoding: {name} (only PCM is supported)", source=source)
    if bits != 16:
        raise ParseError(f"unsupported bit depth: {bits} (only 16-bit PCM)", source=source)
    if channels not in (1, 2):
        raise ParseError(f"unsupported channel count: {channels}", source=source)
    if sample_rate <= 0:
        raise ParseError(f"invalid sample rate: {sample_rate}", source=source)
    if len(payload) % (2 * channels):
        raise ParseError(
            f"data chunk size {len(payload)} is not a whole number of "
            f"{channels}-channel 16-bit frames", source=source)

    samples = np.frombuffer(payload, dtype="<i2").astype(np.int16)
    return AudioBuffer(sample_rate, channels, samples)


def write_wav(buf: AudioBuffer) -> bytes:
    """Serialize with a canonical 44-byte header."""
    payload = buf.samples.astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16,
        1,                                   # PCM
        buf.channels,
        buf.sample_rate,
        buf.sample_rate * buf.channels * 2,  # byte rate
        buf.channels * 2,                    # block align
        16,                                  # bits per sample
        b"data", len(payload),
    )
    return header + payload
