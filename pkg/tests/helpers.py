"""Seeded random fixture generators shared by the unit and acceptance tests."""

from __future__ import annotations

import random
import string

import numpy as np

from audiodeid.core import (
    LABELS,
    EntitySpan,
    EntityType,
    LabelDistribution,
    TimedEntity,
    TimeInterval,
    WordAlignment,
)
from audiodeid.formats.textgrid import TextGridDocument, Tier
from audiodeid.formats.wavpcm import AudioBuffer

_WORD_CHARS = string.ascii_lowercase + "éàçèùâ'"


def random_word(rng: random.Random) -> str:
    word = "".join(rng.choice(_WORD_CHARS) for _ in range(rng.randint(1, 8)))
    if rng.random() < 0.1:
        word += ' "quoted"'  # exercise escaping
    return word


def random_textgrid_doc(rng: random.Random) -> TextGridDocument:
    xmax = rng.uniform(2.0, 30.0)
    tiers = []
    for t in range(rng.randint(0, 3)):
        cursor = rng.uniform(0.0, 0.5)
        entries = []
        for _ in range(rng.randint(0, 12)):
            start = cursor + rng.uniform(0.0, 0.4)  # leave random gaps
            end = start + rng.uniform(0.05, 0.8)
            if end >= xmax:
                break
            entries.append(WordAlignment(random_word(rng), TimeInterval(start, end)))
            cursor = end
        tiers.append(Tier(f"tier-{t}", entries))
    return TextGridDocument(0.0, xmax, tiers)


def random_audio(rng: random.Random, sample_rate: int = 8000, channels: int = 1,
                 seconds: float = 1.0) -> AudioBuffer:
    n = int(sample_rate * seconds) * channels
    samples = np.array([rng.randint(-32768, 32767) for _ in range(n)], dtype=np.int16)
    return AudioBuffer(sample_rate, channels, samples)


def random_conll_sentences(rng: random.Random, n_sentences: int | None = None
                           ) -> list[tuple[list[str], list[str]]]:
    sentences = []
    for _ in range(n_sentences if n_sentences is not None else rng.randint(1, 6)):
        length = rng.randint(1, 10)
        tokens = []
        for _ in range(length):
            token = random_word(rng).replace("\t", " ")
            if rng.random() < 0.1:
                token += " deux mots"  # spaces are legal inside tokens
            tokens.append(token)
        tags = random_bio_tags(rng, length)
        sentences.append((tokens, tags))
    return sentences


def random_bio_tags(rng: random.Random, length: int) -> list[str]:
    tags = []
    open_type: EntityType | None = None
    for _ in range(length):
        roll = rng.random()
        if open_type is not None and roll < 0.4:
            tags.append(f"I-{open_type.code}")
            continue
        if roll < 0.7:
            tags.append("O")
            open_type = None
        else:
            open_type = rng.choice(list(EntityType))
            tags.append(f"B-{open_type.code}")
    return tags


def random_timed_entities(rng: random.Random, max_count: int = 6,
                          horizon: float = 10.0) -> list[TimedEntity]:
    """Non-overlapping, time-ordered entities over [0, horizon].

    Entities last at least 0.15 s and are separated by at least 0.15 s,
    like real named entities separated by other words."""
    entities = []
    cursor = 0.0
    for _ in range(rng.randint(0, max_count)):
        start = cursor + 0.15 + rng.uniform(0.0, 1.5)
        end = start + rng.uniform(0.15, 1.5)
        if end > horizon:
            break
        entities.append(TimedEntity(rng.choice(list(EntityType)),
                                    TimeInterval(start, end)))
        cursor = end
    return entities


def pipeline_like_instance(rng: random.Random, jitter: float = 0.35,
                           max_count: int = 6
                           ) -> tuple[list[TimedEntity], list[TimedEntity]]:
    """A (pred, gold) pair shaped like real pipeline output: predictions
    are the gold intervals with boundary jitter, some dropped, plus a few
    spurious ones."""
    gold = random_timed_entities(rng, max_count=max_count)
    pred: list[TimedEntity] = []
    for entity in gold:
        if rng.random() < 0.12:
            continue  # missed entity
        start = max(0.0, entity.interval.start + rng.uniform(-jitter, jitter))
        end = entity.interval.end + rng.uniform(-jitter, jitter)
        if end > start:
            pred.append(TimedEntity(entity.entity_type, TimeInterval(start, end)))
    for _ in range(rng.randint(0, 2)):
        if len(pred) >= max_count:
            break
        start = rng.uniform(0.0, 9.0)
        pred.append(TimedEntity(rng.choice(list(EntityType)),
                                TimeInterval(start, start + rng.uniform(0.1, 1.0))))
    return pred[:max_count], gold


def random_span_sentence(rng: random.Random, length: int = 12
                         ) -> list[EntitySpan]:
    """Non-overlapping typed spans over a sentence of ``length`` tokens."""
    spans = []
    i = 0
    while i < length:
        if rng.random() < 0.4:
            width = rng.randint(1, min(3, length - i))
            spans.append(EntitySpan(rng.choice(list(EntityType)), i, i + width))
            i += width
        i += 1
    return spans


def random_distribution(rng: random.Random, min_entity_mass: float = 0.0
                        ) -> LabelDistribution:
    weights = [rng.uniform(0.0, 1.0) for _ in LABELS]
    if min_entity_mass > 0.0:
        # guarantee some entity probability so thresholding cannot degenerate
        weights[rng.randint(1, len(LABELS) - 1)] += min_entity_mass
    total = sum(weights)
    return LabelDistribution({label: w / total for label, w in zip(LABELS, weights)})
