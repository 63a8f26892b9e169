"""De-identification of speech recordings from word-aligned transcripts.

Pipeline: parse word-level forced-alignment TextGrids, find named entities
in the transcript, map entity token spans to time intervals, replace those
intervals in the audio with a fill signal, and evaluate every stage
(tolerance-based alignment accuracy, typed and type-ignoring NER scores).
"""

from .core import (
    ConfusionCounts,
    EntitySpan,
    EntityType,
    LabelDistribution,
    TimedEntity,
    TimeInterval,
    Utterance,
    WordAlignment,
    interval_overlap,
)
from .errors import AudioDeidError, ParseError, ProtocolError

__version__ = "0.1.0"

__all__ = [
    "AudioDeidError",
    "ConfusionCounts",
    "EntitySpan",
    "EntityType",
    "LabelDistribution",
    "ParseError",
    "ProtocolError",
    "TimeInterval",
    "TimedEntity",
    "Utterance",
    "WordAlignment",
    "interval_overlap",
    "__version__",
]
