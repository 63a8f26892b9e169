"""Sample-level audio redaction.

Entity intervals become a merged, padded plan; the plan is applied by
replacing every sample inside each interval with a fill signal (silence by
default, a tone or seeded white noise for audible QA).  Sample index
rounding is privacy-biased: floor on the start, ceil on the end, so an
entity never leaks its boundary samples.  All samples outside the plan are
left bit-identical.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .core import TimedEntity, TimeInterval
from .formats.wavpcm import AudioBuffer
from .rng import SplitMix64

logger = logging.getLogger(__name__)

FULL_SCALE = 32767


@dataclass(frozen=True)
class Silence:
    pass


@dataclass(frozen=True)
class Tone:
    """Sine fill; the phase follows the absolute sample index, so applying
    the same plan twice writes the same values."""

    frequency: float = 440.0
    amplitude: float = 0.3

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError(f"tone frequency must be positive, got {self.frequency}")
        _check_amplitude(self.amplitude)


@dataclass(frozen=True)
class WhiteNoise:
    """Uniform noise from the pinned SplitMix64 stream; a fixed seed makes
    the redacted output reproducible."""

    amplitude: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        _check_amplitude(self.amplitude)


Fill = Union[Silence, Tone, WhiteNoise]


def _check_amplitude(amplitude: float) -> None:
    if not 0.0 < amplitude <= 1.0:
        raise ValueError(f"amplitude must be in (0, 1], got {amplitude}")


@dataclass
class RedactionPlan:
    """Merged, sorted intervals plus the fill to write inside them."""

    intervals: list[TimeInterval]
    fill: Fill = Silence()
    pad: float = 0.0

    def __post_init__(self) -> None:
        if self.pad < 0:
            raise ValueError(f"pad must be non-negative, got {self.pad}")
        for prev, cur in zip(self.intervals, self.intervals[1:]):
            if cur.start < prev.end:
                raise ValueError(f"plan intervals overlap or are unsorted: {prev} then {cur}")

    @property
    def total_seconds(self) -> float:
        return sum(iv.duration for iv in self.intervals)


def merge_intervals(intervals: Iterable[TimeInterval]) -> list[TimeInterval]:
    """Union of intervals: sorted, with overlapping or touching ones merged."""
    merged: list[TimeInterval] = []
    for iv in sorted(intervals, key=lambda x: (x.start, x.end)):
        if merged and iv.start <= merged[-1].end:
            if iv.end > merged[-1].end:
                merged[-1] = TimeInterval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    return merged


def build_plan(entities: Iterable[TimedEntity], pad: float = 0.0,
               fill: Fill = Silence()) -> RedactionPlan:
    """Widen each entity interval by ``pad`` seconds on both sides (clamped
    at zero), then merge."""
    if pad < 0:
        raise ValueError(f"pad must be non-negative, got {pad}")
    widened = [
        TimeInterval(max(0.0, e.interval.start - pad), e.interval.end + pad)
        for e in entities
    ]
    return RedactionPlan(merge_intervals(widened), fill, pad)


def redact(audio: AudioBuffer, plan: RedactionPlan) -> AudioBuffer:
    """Apply the plan, returning a new buffer.

    Frames in ``[floor(start * rate), ceil(end * rate))`` are overwritten
    on every channel.  An interval reaching past the end of the audio is
    clamped with a warning; one starting at or after the end is an error.
    """
    samples = audio.samples.copy()
    frames = samples.reshape(-1, audio.channels)
    n_frames = audio.n_frames
    noise_rng = SplitMix64(plan.fill.seed) if isinstance(plan.fill, WhiteNoise) else None

    for iv in plan.intervals:
        if iv.start >= audio.duration:
            raise ValueError(
                f"interval ({iv.start}, {iv.end}) starts at or after the end of the "
                f"audio ({audio.duration:.6f} s)")
        start = math.floor(iv.start * audio.sample_rate)
        end = math.ceil(iv.end * audio.sample_rate)
        if end > n_frames:
            logger.warning("interval (%s, %s) extends past the end of the audio "
                           "(%.6f s); clamping", iv.start, iv.end, audio.duration)
            end = n_frames
        _write_fill(frames, start, end, plan.fill, audio.sample_rate, noise_rng)

    return AudioBuffer(audio.sample_rate, audio.channels, samples)


def _write_fill(frames: np.ndarray, start: int, end: int, fill: Fill,
                rate: int, noise_rng: SplitMix64 | None) -> None:
    if end <= start:
        return
    if isinstance(fill, Silence):
        frames[start:end, :] = 0
    elif isinstance(fill, Tone):
        index = np.arange(start, end, dtype=np.float64)
        wave = fill.amplitude * FULL_SCALE * np.sin(2.0 * np.pi * fill.frequency * index / rate)
        frames[start:end, :] = np.rint(wave).astype(np.int16)[:, None]
    else:
        assert noise_rng is not None
        scale = fill.amplitude * FULL_SCALE
        values = [int(round((2.0 * noise_rng.next_unit() - 1.0) * scale))
                  for _ in range(end - start)]
        frames[start:end, :] = np.asarray(values, dtype=np.int16)[:, None]
