"""Mapping token-level entity spans onto time intervals.

The NER tokenization and the forced-alignment word list come from the same
transcript, so they must agree after a light normalization (case folding
plus dropping punctuation-only tokens, which aligners never emit).  Any
other divergence is a hard error carrying the first mismatching position:
silently resynchronizing would hide upstream bugs.
"""

from __future__ import annotations

from .core import (
    EntitySpan,
    TimedEntity,
    TimeInterval,
    WordAlignment,
    is_punctuation_token,
    normalize_token,
)
from .errors import AudioDeidError


class ReconcileError(AudioDeidError):
    """Token sequence and aligned word sequence diverge."""

    def __init__(self, position: int, token: str | None, word: str | None):
        self.position = position
        self.token = token
        self.word = word
        super().__init__(
            f"tokens and aligned words diverge at position {position}: "
            f"token {token!r} vs aligned word {word!r}")


def reconcile(tokens: list[str], alignments: list[WordAlignment]) -> dict[int, int]:
    """Map token indices to alignment indices.

    Punctuation-only tokens are skipped (they have no audio); every other
    token must match its aligned word after :func:`normalize_token`.
    Raises :class:`ReconcileError` at the first divergence.
    """
    if not tokens or not alignments:
        raise ValueError("reconcile needs non-empty tokens and alignments")
    kept = [(i, normalize_token(tok)) for i, tok in enumerate(tokens)
            if not is_punctuation_token(tok)]
    for j, (i, norm) in enumerate(kept):
        if j >= len(alignments):
            raise ReconcileError(i, tokens[i], None)
        if norm != normalize_token(alignments[j].word):
            raise ReconcileError(i, tokens[i], alignments[j].word)
    if len(alignments) > len(kept):
        raise ReconcileError(len(tokens), None, alignments[len(kept)].word)
    return {i: j for j, (i, _) in enumerate(kept)}


def span_to_interval(span: EntitySpan, alignments: list[WordAlignment],
                     mapping: dict[int, int]) -> TimedEntity:
    """Time interval covering every mapped word of the span.

    The interval runs from the first covered word's start to the last
    covered word's end.  A span whose tokens are all unmapped (outside the
    mapping, or punctuation-only) is an error.
    """
    covered = [mapping[i] for i in range(span.token_start, span.token_end) if i in mapping]
    if not covered:
        raise ValueError(
            f"span ({span.token_start}, {span.token_end}) lies outside the "
            f"token-to-alignment mapping")
    first = alignments[min(covered)]
    last = alignments[max(covered)]
    return TimedEntity(span.entity_type,
                       TimeInterval(first.interval.start, last.interval.end))
