"""Domain types shared by every stage of the de-identification pipeline.

All times are 64-bit real seconds, never sample counts, so the same types
serve 8 kHz and 16 kHz audio; conversion to sample indices happens only in
the redaction step.  The interval ``(0, 0)`` is a legal value used as a
sentinel meaning "no interval exists on this side".

Everything here is an immutable value with no I/O; instances are safe to
share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class EntityType(Enum):
    """The five entity categories the pipeline redacts."""

    PERSON = "PER"
    LOCATION = "LOC"
    ORGANIZATION = "ORG"
    CURRENCY = "CUR"
    MONEY_AMOUNT = "MONEY"

    @property
    def code(self) -> str:
        """Short wire/file code (``PER``, ``LOC``, ``ORG``, ``CUR``, ``MONEY``)."""
        return self.value

    @property
    def display(self) -> str:
        """Human-readable name used in report tables."""
        return self.name.replace("_", " ").title()

    @classmethod
    def from_code(cls, code: str) -> "EntityType":
        try:
            return cls(code)
        except ValueError:
            valid = ", ".join(t.code for t in cls)
            raise ValueError(f"unknown entity type {code!r} (expected one of: {valid})") from None


OUTSIDE = "O"

# Fixed label order; argmax ties are broken by position in this tuple so
# results are identical across platforms.
LABELS: tuple[str, ...] = (OUTSIDE,) + tuple(
    f"{prefix}-{etype.code}" for etype in EntityType for prefix in ("B", "I")
)

_LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}

# LabelDistribution invariant: probabilities must sum to 1 within this.
PROB_SUM_TOLERANCE = 1e-6


def split_bio_tag(tag: str) -> tuple[str, EntityType | None]:
    """Split a BIO tag into its prefix and entity type.

    ``"B-PER"`` becomes ``("B", EntityType.PERSON)`` and ``"O"`` becomes
    ``("O", None)``.  Raises ``ValueError`` for anything outside the
    vocabulary.
    """
    if tag == OUTSIDE:
        return OUTSIDE, None
    if tag not in _LABEL_INDEX:
        raise ValueError(f"unknown BIO tag {tag!r}")
    prefix, _, code = tag.partition("-")
    return prefix, EntityType.from_code(code)


@dataclass(frozen=True)
class TimeInterval:
    """A ``[start, end]`` span in seconds.

    ``(0, 0)`` is representable on purpose: it encodes the absence of a
    prediction or gold interval in the time-domain metrics.
    """

    start: float
    end: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.start <= self.end):
            raise ValueError(f"invalid interval ({self.start}, {self.end}): need 0 <= start <= end")

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def is_zero(self) -> bool:
        """True for the (0, 0) "absent" sentinel."""
        return self.start == 0.0 and self.end == 0.0


def interval_overlap(a: TimeInterval, b: TimeInterval) -> float:
    """Seconds shared by two intervals (0 when disjoint)."""
    return max(0.0, min(a.end, b.end) - max(a.start, b.start))


@dataclass(frozen=True)
class WordAlignment:
    """One transcript token bound to its time interval."""

    word: str
    interval: TimeInterval

    def __post_init__(self) -> None:
        if not self.word.strip():
            raise ValueError("aligned word must be non-empty")


def check_alignment_order(alignments: list[WordAlignment], *, context: str = "") -> None:
    """Raise if word intervals are not sorted by start and non-overlapping.

    Touching intervals (``next.start == prev.end``) are fine; a tiny slack
    absorbs float fuzz from textual time stamps.
    """
    where = f" in {context}" if context else ""
    for prev, cur in zip(alignments, alignments[1:]):
        if cur.interval.start < prev.interval.start:
            raise ValueError(f"word intervals out of order{where}: "
                             f"{cur.word!r} starts before {prev.word!r}")
        if cur.interval.start < prev.interval.end - 1e-9:
            raise ValueError(f"word intervals overlap{where}: {prev.word!r} and {cur.word!r}")


@dataclass(frozen=True)
class EntitySpan:
    """A typed entity over token indices, ``token_end`` exclusive."""

    entity_type: EntityType
    token_start: int
    token_end: int

    def __post_init__(self) -> None:
        if not (0 <= self.token_start < self.token_end):
            raise ValueError(
                f"invalid span ({self.token_start}, {self.token_end}): need 0 <= start < end"
            )


def check_spans_disjoint(spans: list[EntitySpan], *, context: str = "") -> None:
    """Raise if any two spans share a token index."""
    where = f" in {context}" if context else ""
    ordered = sorted(spans, key=lambda s: (s.token_start, s.token_end))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.token_start < prev.token_end:
            raise ValueError(f"entity spans overlap{where}: {prev} and {cur}")


@dataclass(frozen=True)
class TimedEntity:
    """A typed entity located in time."""

    entity_type: EntityType
    interval: TimeInterval


def normalize_token(token: str) -> str:
    """Case-fold a token and canonicalize the apostrophe (U+2019 -> ')."""
    return token.replace("’", "'").casefold()


def is_punctuation_token(token: str) -> bool:
    """True when the token carries no letters or digits (e.g. ``"..."``)."""
    return bool(token) and not any(ch.isalnum() for ch in token)


@dataclass
class Utterance:
    """One speaker's transcribed phrase, optionally with word alignments.

    When ``alignments`` is present it must pair 1:1 with ``tokens`` (same
    length, same words up to :func:`normalize_token`); use
    ``timealign.reconcile`` for token sequences that still carry
    punctuation-only tokens.
    """

    id: str
    tokens: list[str]
    alignments: list[WordAlignment] | None = None

    def __post_init__(self) -> None:
        if self.alignments is None:
            return
        if len(self.alignments) != len(self.tokens):
            raise ValueError(
                f"utterance {self.id!r}: {len(self.tokens)} tokens "
                f"but {len(self.alignments)} aligned words"
            )
        for i, (token, alignment) in enumerate(zip(self.tokens, self.alignments)):
            if normalize_token(token) != normalize_token(alignment.word):
                raise ValueError(
                    f"utterance {self.id!r}: token {i} {token!r} does not match "
                    f"aligned word {alignment.word!r}"
                )
        check_alignment_order(self.alignments, context=f"utterance {self.id!r}")


@dataclass
class LabelDistribution:
    """Per-token probability vector over ``O`` and the entity labels.

    Absent labels mean probability 0.  Probabilities must lie in [0, 1]
    and sum to 1 within ``PROB_SUM_TOLERANCE``.
    """

    probs: dict[str, float]

    def __post_init__(self) -> None:
        for label, p in self.probs.items():
            if label not in _LABEL_INDEX:
                raise ValueError(f"unknown label {label!r} in distribution")
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability of {label!r} out of range: {p}")
        total = sum(self.probs.values())
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, expected 1 +- {PROB_SUM_TOLERANCE}")

    @classmethod
    def one_hot(cls, label: str) -> "LabelDistribution":
        if label not in _LABEL_INDEX:
            raise ValueError(f"unknown label {label!r}")
        return cls({label: 1.0})

    def prob(self, label: str) -> float:
        return self.probs.get(label, 0.0)

    def argmax_label(self) -> str:
        """Most likely label, ties broken by the fixed LABELS order."""
        best = OUTSIDE
        best_p = self.prob(OUTSIDE)
        for label in LABELS[1:]:
            p = self.prob(label)
            if p > best_p:
                best, best_p = label, p
        return best

    @property
    def entity_mass(self) -> float:
        """Total probability assigned to non-``O`` labels."""
        return sum(p for label, p in self.probs.items() if label != OUTSIDE)


@dataclass(frozen=True)
class ConfusionCounts:
    """TP/FP/FN accumulator; merging is associative so per-utterance
    results can be reduced in any order."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)
