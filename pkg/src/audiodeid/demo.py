"""Self-contained demo corpus.

Materializes everything needed to run the full pipeline and both
evaluations offline: a ~10 s synthetic recording (one soft tone per word),
its word-level TextGrid, the transcript, a small French lexicon for the
gazetteer backend, gold entities (timed JSON and BIO CoNLL), and a pair of
annotated articles plus a remap file for the corpus-prep command.
Everything is generated deterministically, so reruns are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import EntitySpan, EntityType, TimedEntity, TimeInterval, WordAlignment
from .formats.entjson import write_entities_json
from .formats.conll import write_conll
from .formats.textgrid import TextGridDocument, Tier, write_textgrid
from .formats.wavpcm import AudioBuffer, write_wav
from .tagging import encode_bio

SAMPLE_RATE = 16000
UTTERANCE_ID = "u1"

DEMO_TOKENS = [
    "bonjour", "jean", "dupont", "habite", "à", "paris", "il",
    "travaille", "chez", "renault", "pour", "12", "euros",
]

# Word i speaks from 0.30 + 0.70 i for 0.55 s, leaving 0.15 s gaps.
_WORD_START = 0.30
_WORD_STEP = 0.70
_WORD_LENGTH = 0.55
_XMAX = 10.0

DEMO_GOLD_SPANS = [
    EntitySpan(EntityType.PERSON, 1, 3),
    EntitySpan(EntityType.LOCATION, 5, 6),
    EntitySpan(EntityType.ORGANIZATION, 9, 10),
    EntitySpan(EntityType.MONEY_AMOUNT, 11, 13),
]

DEMO_LEXICON = """\
# demo gazetteer lexicon
[PER]
jean dupont
marie curie
paul verlaine
[LOC]
paris
lyon
stockholm
bruxelles
[ORG]
renault
total
lazio
sochaux
banque de france
commission européenne
[CUR]
euro
euros
dollar
dollars
franc
francs
[MONEY]
"""

DEMO_REMAP = """\
# remap rules for the demo articles (extends the built-in defaults)
clubs = ORG
geopolitical entities "g20" = DELETE
"""


def demo_alignments() -> list[WordAlignment]:
    alignments = []
    for i, token in enumerate(DEMO_TOKENS):
        start = _WORD_START + i * _WORD_STEP
        alignments.append(WordAlignment(token, TimeInterval(start, start + _WORD_LENGTH)))
    return alignments


def demo_textgrid() -> TextGridDocument:
    return TextGridDocument(0.0, _XMAX, [Tier("words", demo_alignments())])


def demo_gold_timed() -> list[TimedEntity]:
    alignments = demo_alignments()
    timed = []
    for span in DEMO_GOLD_SPANS:
        timed.append(TimedEntity(
            span.entity_type,
            TimeInterval(alignments[span.token_start].interval.start,
                         alignments[span.token_end - 1].interval.end)))
    return timed


def demo_audio() -> AudioBuffer:
    """Synthetic speech stand-in: a distinct soft tone during each word
    interval, silence in the gaps."""
    n = int(_XMAX * SAMPLE_RATE)
    signal = np.zeros(n, dtype=np.float64)
    index = np.arange(n, dtype=np.float64)
    for i, alignment in enumerate(demo_alignments()):
        start = int(alignment.interval.start * SAMPLE_RATE)
        end = int(alignment.interval.end * SAMPLE_RATE)
        freq = 120.0 + 35.0 * i
        signal[start:end] = 0.25 * np.sin(2.0 * np.pi * freq * index[start:end] / SAMPLE_RATE)
    samples = np.rint(signal * 32767).astype(np.int16)
    return AudioBuffer(SAMPLE_RATE, 1, samples)


def _annotated_article(article_id: str, text: str,
                       annotations: list[tuple[str, str]]) -> dict:
    """Article JSON with entity offsets located by substring search."""
    entities = []
    for label, surface in annotations:
        start = text.find(surface)
        if start < 0:
            raise AssertionError(f"demo article {article_id}: {surface!r} not in text")
        entities.append({"label": label, "start": start, "end": start + len(surface)})
    entities.sort(key=lambda e: e["start"])
    return {"id": article_id, "text": text, "entities": entities}


def demo_articles() -> list[dict]:
    article_1 = _annotated_article(
        "article-01",
        "Jean Dupont visite Paris en mars. La société Renault annonce "
        "12 millions d'euros de bénéfice. M. Martin dirige la filiale de Lyon. "
        "Les investisseurs saluent la Banque de France. Le groupe Total "
        "investit 5 milliards d'euros. Marie Curie reçoit un prix à Stockholm. "
        "Le G20 se réunit demain.",
        [
            ("persons", "Jean Dupont"),
            ("cities", "Paris"),
            ("companies", "Renault"),
            ("money amounts", "12 millions d'euros"),
            ("cities", "Lyon"),
            ("organizations", "la Banque de France"),
            ("companies", "Total"),
            ("money amounts", "5 milliards d'euros"),
            ("persons", "Marie Curie"),
            ("cities", "Stockholm"),
            ("geopolitical entities", "G20"),
        ],
    )
    article_2 = _annotated_article(
        "article-02",
        "La Lazio gagne le match. Le club de Sochaux recrute un attaquant. "
        "Les supporters de Lyon fêtent la victoire. Un analyste prévoit "
        "300 euros de dividende. La Commission européenne siège à Bruxelles. "
        "Paul Verlaine écrit des poèmes. Le dollar reste stable.",
        [
            ("clubs", "La Lazio"),
            ("clubs", "Sochaux"),
            ("cities", "Lyon"),
            ("money amounts", "300 euros"),
            ("organizations", "La Commission européenne"),
            ("cities", "Bruxelles"),
            ("persons", "Paul Verlaine"),
            ("currencies", "dollar"),
        ],
    )
    return [article_1, article_2]


def write_demo_corpus(out_dir: str | Path) -> dict:
    """Write the demo corpus into ``out_dir`` and return a file summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / "recording.wav").write_bytes(write_wav(demo_audio()))
    (out / "recording.TextGrid").write_bytes(write_textgrid(demo_textgrid()))
    (out / "transcript.txt").write_text(" ".join(DEMO_TOKENS) + "\n", encoding="utf-8")
    (out / "lexicon.txt").write_text(DEMO_LEXICON, encoding="utf-8")
    (out / "gold_entities.json").write_bytes(
        write_entities_json([(UTTERANCE_ID, demo_gold_timed())]))
    (out / "gold.conll").write_bytes(
        write_conll([(DEMO_TOKENS, encode_bio(DEMO_GOLD_SPANS, len(DEMO_TOKENS)))]))
    (out / "remap.txt").write_text(DEMO_REMAP, encoding="utf-8")

    articles_dir = out / "articles"
    articles_dir.mkdir(exist_ok=True)
    for article in demo_articles():
        path = articles_dir / f"{article['id']}.json"
        path.write_text(json.dumps(article, ensure_ascii=False, indent=2) + "\n",
                        encoding="utf-8")

    return {
        "out_dir": str(out),
        "utterance_id": UTTERANCE_ID,
        "tokens": len(DEMO_TOKENS),
        "entities": len(DEMO_GOLD_SPANS),
        "articles": len(demo_articles()),
    }
