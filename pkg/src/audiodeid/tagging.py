"""Per-token label distributions and decoded entity spans.

Two built-in ways to produce distributions: a lexicon (gazetteer) tagger
that emits one-hot distributions, and clients for an external model served
over HTTP or a line-delimited stdin/stdout subprocess.  On top of either
sits the confidence-threshold post-processing: when the ``O`` probability
falls below the threshold it is zeroed and the entity-label mass is
renormalized, which trades precision for recall without retraining.

Wire protocol (shared with any external tagger service):

* ``POST /tag`` with ``{"sentences": [["tok", ...], ...]}`` returns
  ``{"distributions": [[{"O": 0.9, "B-PER": 0.05, ...}, ...], ...]}`` --
  one object per token, absent labels meaning probability 0, each token
  summing to 1 within ``WIRE_SUM_TOLERANCE``.
* ``GET /health`` returns ``{"status": "ok", "labels": [...]}``.
* The same JSON bodies work over a subprocess pipe, one request per line
  on stdin, one response per line on stdout.
"""

from __future__ import annotations

import json
import math
import os
import re
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Iterable

import requests

from .core import (
    LABELS,
    OUTSIDE,
    EntitySpan,
    EntityType,
    LabelDistribution,
    check_spans_disjoint,
    normalize_token,
    split_bio_tag,
)
from .errors import AudioDeidError, ParseError, ProtocolError

# Wire distributions may sum to 1 within this; they are rescaled exactly
# before entering the stricter in-memory invariant.
WIRE_SUM_TOLERANCE = 1e-4

TAGGER_URL_ENV = "DEID_TAGGER_URL"

_ENTITY_LABELS = tuple(label for label in LABELS if label != OUTSIDE)


class DegenerateDistributionError(AudioDeidError):
    """Thresholding fired but there was no entity mass to renormalize."""


@dataclass
class TaggedSentence:
    """Tokens with their (possibly thresholded) distributions and the
    entity spans decoded from the argmax labels."""

    tokens: list[str]
    distributions: list[LabelDistribution]
    spans: list[EntitySpan]

    def __post_init__(self) -> None:
        if len(self.distributions) != len(self.tokens):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.distributions)} distributions")

    @property
    def labels(self) -> list[str]:
        return [d.argmax_label() for d in self.distributions]


def apply_threshold(dist: LabelDistribution, theta: float,
                    mode: str = "renormalize") -> LabelDistribution:
    """Zero the ``O`` probability when it falls below ``theta``.

    With the default ``renormalize`` mode the remaining entity masses are
    scaled proportionally to sum to 1, which preserves their ratios and
    makes the non-O decision monotone in ``theta``.  The ``softmax`` mode
    instead re-softmaxes the entity probabilities (treating them as
    logits, ``O`` pinned to zero); it distorts ratios and exists for
    comparison only.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be within [0, 1], got {theta}")
    if dist.prob(OUTSIDE) >= theta:
        return dist
    entity = {label: p for label, p in dist.probs.items() if label != OUTSIDE and p > 0.0}
    if not entity:
        raise DegenerateDistributionError(
            f"p(O)={dist.prob(OUTSIDE)} is below theta={theta} but every entity "
            f"label has probability 0")
    if mode == "renormalize":
        total = sum(entity.values())
        return LabelDistribution({label: p / total for label, p in entity.items()})
    if mode == "softmax":
        exps = {label: math.exp(dist.prob(label)) for label in _ENTITY_LABELS}
        total = sum(exps.values())
        return LabelDistribution({label: e / total for label, e in exps.items()})
    raise ValueError(f"unknown threshold mode {mode!r}")


def decode_bio(tags: Iterable[str], *, strict: bool = False) -> list[EntitySpan]:
    """Decode BIO tags into maximal spans.

    Lenient by default: an ``I-X`` with no open span of type ``X`` opens a
    new span, and a type change closes the previous one.  With
    ``strict=True`` such orphan continuations raise ``ValueError``.
    """
    spans: list[EntitySpan] = []
    open_type: EntityType | None = None
    open_start = 0

    def close(end: int) -> None:
        nonlocal open_type
        if open_type is not None:
            spans.append(EntitySpan(open_type, open_start, end))
            open_type = None

    i = 0
    for i, tag in enumerate(tags):
        prefix, etype = split_bio_tag(tag)
        if prefix == OUTSIDE:
            close(i)
        elif prefix == "B":
            close(i)
            open_type, open_start = etype, i
        else:  # I
            if etype is not open_type:
                if strict:
                    raise ValueError(
                        f"tag {tag!r} at token {i} continues no open span of its type")
                close(i)
                open_type, open_start = etype, i
    close(i + 1)
    return spans


def encode_bio(spans: Iterable[EntitySpan], length: int) -> list[str]:
    """Canonical BIO encoding of non-overlapping spans over ``length``
    tokens; the inverse of :func:`decode_bio`."""
    spans = list(spans)
    check_spans_disjoint(spans)
    tags = [OUTSIDE] * length
    for span in spans:
        if span.token_end > length:
            raise ValueError(f"span {span} exceeds sentence length {length}")
        tags[span.token_start] = f"B-{span.entity_type.code}"
        for i in range(span.token_start + 1, span.token_end):
            tags[i] = f"I-{span.entity_type.code}"
    return tags


# ---------------------------------------------------------------------------
# Gazetteer backend
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)*")


class GazetteerTagger:
    """Lexicon-based tagger emitting exact one-hot distributions.

    Matches the longest known phrase at each position (ties broken by the
    entity-type order), plus one money pattern: a numeric token directly
    followed by a currency word becomes a money amount.  Lexicon entries
    are case-folded and duplicate-free.
    """

    def __init__(self, lexicons: dict[EntityType, Iterable[str]]):
        self._phrases: dict[EntityType, set[tuple[str, ...]]] = {}
        self._max_len: dict[EntityType, int] = {}
        for etype in EntityType:
            phrases = {
                tuple(normalize_token(word) for word in entry.split())
                for entry in lexicons.get(etype, ())
                if entry.strip()
            }
            self._phrases[etype] = phrases
            self._max_len[etype] = max((len(p) for p in phrases), default=0)
        self._currency_words = {
            phrase[0] for phrase in self._phrases[EntityType.CURRENCY] if len(phrase) == 1
        }

    @classmethod
    def from_path(cls, path: str) -> "GazetteerTagger":
        with open(path, "rb") as handle:
            return cls(parse_lexicon(handle.read().decode("utf-8"), source=path))

    def label_tokens(self, tokens: list[str]) -> list[str]:
        """BIO tags for one sentence."""
        if not tokens:
            raise ValueError("empty sentence")
        norm = [normalize_token(t) for t in tokens]
        tags: list[str] = []
        i = 0
        while i < len(tokens):
            best: tuple[int, int, EntityType] | None = None  # (length, -rank, type)
            for rank, etype in enumerate(EntityType):
                limit = min(self._max_len[etype], len(tokens) - i)
                for length in range(limit, 0, -1):
                    if tuple(norm[i:i + length]) in self._phrases[etype]:
                        candidate = (length, -rank, etype)
                        if best is None or candidate[:2] > best[:2]:
                            best = candidate
                        break
            if (i + 1 < len(tokens) and _NUMBER_RE.fullmatch(tokens[i])
                    and norm[i + 1] in self._currency_words):
                money = (2, -list(EntityType).index(EntityType.MONEY_AMOUNT),
                         EntityType.MONEY_AMOUNT)
                if best is None or money[:2] > best[:2]:
                    best = money
            if best is None:
                tags.append(OUTSIDE)
                i += 1
            else:
                length, _, etype = best
                tags.append(f"B-{etype.code}")
                tags.extend([f"I-{etype.code}"] * (length - 1))
                i += length
        return tags

    def tag_batch(self, sentences: list[list[str]]) -> list[list[LabelDistribution]]:
        return [
            [LabelDistribution.one_hot(tag) for tag in self.label_tokens(tokens)]
            for tokens in sentences
        ]


def parse_lexicon(text: str, *, source: str = "lexicon") -> dict[EntityType, list[str]]:
    """Parse the gazetteer lexicon format: ``[PER]``-style section headers,
    one phrase per line, ``#`` comments."""
    lexicons: dict[EntityType, list[str]] = {etype: [] for etype in EntityType}
    current: EntityType | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            try:
                current = EntityType.from_code(line[1:-1].strip())
            except ValueError as exc:
                raise ParseError(str(exc), source=source, line=line_no) from None
            continue
        if current is None:
            raise ParseError(f"entry {line!r} before any [SECTION] header",
                             source=source, line=line_no)
        lexicons[current].append(line)
    return lexicons


# ---------------------------------------------------------------------------
# External backends
# ---------------------------------------------------------------------------


def distributions_from_wire(payload: object, sentences: list[list[str]], *,
                            origin: str) -> list[list[LabelDistribution]]:
    """Validate a ``/tag`` response body and convert it to distributions.

    Enforces the protocol contract: one distribution per token, labels
    inside the vocabulary, non-negative values summing to 1 within
    ``WIRE_SUM_TOLERANCE``.  Validated values are rescaled by their exact
    sum so the in-memory 1e-6 invariant holds.
    """
    if not isinstance(payload, dict) or "distributions" not in payload:
        raise ProtocolError(f"{origin}: response lacks a 'distributions' field")
    outer = payload["distributions"]
    if not isinstance(outer, list) or len(outer) != len(sentences):
        raise ProtocolError(
            f"{origin}: expected distributions for {len(sentences)} sentences, "
            f"got {len(outer) if isinstance(outer, list) else type(outer).__name__}")

    result: list[list[LabelDistribution]] = []
    for s_index, (tokens, rows) in enumerate(zip(sentences, outer)):
        if not isinstance(rows, list) or len(rows) != len(tokens):
            raise ProtocolError(
                f"{origin}: sentence {s_index} has {len(tokens)} tokens but "
                f"{len(rows) if isinstance(rows, list) else 'no'} distributions")
        converted: list[LabelDistribution] = []
        for t_index, row in enumerate(rows):
            where = f"{origin}: sentence {s_index} token {t_index}"
            if not isinstance(row, dict):
                raise ProtocolError(f"{where}: distribution must be an object")
            total = 0.0
            for label, value in row.items():
                if label not in LABELS:
                    raise ProtocolError(f"{where}: label {label!r} outside the vocabulary")
                if not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise ProtocolError(f"{where}: non-numeric probability for {label!r}")
                if value < 0.0 or value > 1.0 + WIRE_SUM_TOLERANCE:
                    raise ProtocolError(f"{where}: probability {value} for {label!r} "
                                        f"out of range")
                total += value
            if abs(total - 1.0) > WIRE_SUM_TOLERANCE:
                raise ProtocolError(
                    f"{where}: probabilities sum to {total}, "
                    f"expected 1 +- {WIRE_SUM_TOLERANCE}")
            converted.append(LabelDistribution(
                {label: float(value) / total for label, value in row.items() if value > 0.0}))
        result.append(converted)
    return result


class HttpTagger:
    """Client for a tagger service speaking the wire protocol over HTTP."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def tag_batch(self, sentences: list[list[str]]) -> list[list[LabelDistribution]]:
        try:
            response = requests.post(f"{self.base_url}/tag",
                                     json={"sentences": sentences}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProtocolError(f"tagger at {self.base_url} unreachable: {exc}") from None
        if response.status_code != 200:
            raise ProtocolError(
                f"tagger at {self.base_url} returned HTTP {response.status_code}: "
                f"{response.text[:200]}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolError(f"tagger at {self.base_url} sent invalid JSON: {exc}") from None
        return distributions_from_wire(payload, sentences, origin=self.base_url)

    def health(self) -> dict:
        try:
            response = requests.get(f"{self.base_url}/health", timeout=self.timeout)
            response.raise_for_status()
            return response.json()
        except (requests.RequestException, ValueError) as exc:
            raise ProtocolError(f"health check against {self.base_url} failed: {exc}") from None


class SubprocessTagger:
    """Client for a tagger run as a child process: one JSON request per
    stdin line, one JSON response per stdout line.  Requests are
    serialized with a lock, so concurrent callers are safe."""

    def __init__(self, command: str):
        self.command = command
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1)
        except OSError as exc:
            raise ProtocolError(f"cannot start tagger {command!r}: {exc}") from None

    def tag_batch(self, sentences: list[list[str]]) -> list[list[LabelDistribution]]:
        request = json.dumps({"sentences": sentences}, ensure_ascii=False)
        with self._lock:
            try:
                assert self._proc.stdin is not None and self._proc.stdout is not None
                self._proc.stdin.write(request + "\n")
                self._proc.stdin.flush()
                line = self._proc.stdout.readline()
            except (BrokenPipeError, OSError) as exc:
                raise ProtocolError(f"tagger {self.command!r} pipe broken: {exc}") from None
        if not line:
            raise ProtocolError(f"tagger {self.command!r} closed its output stream")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"tagger {self.command!r} sent invalid JSON: {exc}") from None
        return distributions_from_wire(payload, sentences, origin=self.command)

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.terminate()
        self._proc.wait(timeout=5)

    def __enter__(self) -> "SubprocessTagger":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def parse_backend_spec(spec: str, env: dict | None = None):
    """Build a backend from a CLI spec string.

    ``gazetteer:<lexicon file>``, ``http:<url>`` (bare ``http`` falls back
    to the ``DEID_TAGGER_URL`` environment variable), or
    ``subprocess:<command>``.
    """
    env = os.environ if env is None else env
    if spec.startswith("gazetteer:"):
        return GazetteerTagger.from_path(spec[len("gazetteer:"):])
    if spec in ("http", "http:"):
        url = env.get(TAGGER_URL_ENV, "")
        if not url:
            raise ValueError(f"backend {spec!r} needs a URL or {TAGGER_URL_ENV} set")
        return HttpTagger(url if "://" in url else f"http://{url}")
    if spec.startswith(("http://", "https://")):
        return HttpTagger(spec)
    if spec.startswith("http:"):
        url = spec[len("http:"):]
        return HttpTagger(url if "://" in url else f"http://{url}")
    if spec.startswith("subprocess:"):
        return SubprocessTagger(spec[len("subprocess:"):])
    raise ValueError(
        f"unknown backend spec {spec!r} "
        f"(expected gazetteer:<file>, http:<url> or subprocess:<command>)")


def tag_sentences(sentences: list[list[str]], backend, theta: float | None = None,
                  threshold_mode: str = "renormalize",
                  strict_bio: bool = False) -> list[TaggedSentence]:
    """Run the backend over a batch, threshold when asked, decode spans."""
    for tokens in sentences:
        if not tokens:
            raise ValueError("empty sentence")
    batches = backend.tag_batch(sentences)
    tagged: list[TaggedSentence] = []
    for tokens, dists in zip(sentences, batches):
        if theta is not None:
            dists = [apply_threshold(d, theta, threshold_mode) for d in dists]
        labels = [d.argmax_label() for d in dists]
        tagged.append(TaggedSentence(tokens, dists, decode_bio(labels, strict=strict_bio)))
    return tagged


def tag(tokens: list[str], backend, theta: float | None = None,
        threshold_mode: str = "renormalize", strict_bio: bool = False) -> TaggedSentence:
    """Tag a single sentence (see :func:`tag_sentences`)."""
    return tag_sentences([tokens], backend, theta, threshold_mode, strict_bio)[0]
