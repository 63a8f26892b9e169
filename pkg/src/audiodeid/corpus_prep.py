"""Corpus preprocessing for training-data preparation.

Covers the four steps needed to turn annotated news articles into
sentence-level BIO data: whitespace normalization with entity-offset
bookkeeping, entity-label remapping through an editable rule table,
sentence splitting that never cuts through an annotation, and seeded
k-fold partitioning that is reproducible across implementations
(see :mod:`audiodeid.rng` for the pinned generator).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .core import EntitySpan, EntityType
from .errors import AudioDeidError, ParseError
from .rng import SplitMix64

# Characters normalized to a plain ASCII space: tab, thin space, no-break space.
_SPACE_EQUIVALENTS = "\t  "

# Leading determiners stripped from the front of entity annotations (never
# from the running text).  Longest alternatives first so "de la" wins over
# "la"; the word forms need following whitespace or the annotation edge so
# "Laval" is untouched.
_DETERMINER_RE = re.compile(
    r"(?:(?:de la|les|des|une|un|du|le|la)(?:\s+|$)|l['’])", re.IGNORECASE)

_ABBREVIATIONS = {"M.", "MM.", "Mme.", "Mlle.", "Dr.", "Pr.", "St.", "etc.", "cf."}


class UnmappedLabelError(AudioDeidError):
    """One or more source labels had no rule in the remap table."""

    def __init__(self, labels: Iterable[str]):
        self.labels = sorted(set(labels))
        super().__init__("unmapped entity labels: " + ", ".join(self.labels))


@dataclass(frozen=True)
class RawEntity:
    """A source-corpus annotation: label over a character range of the text."""

    label: str
    start: int
    end: int


@dataclass(frozen=True)
class LabeledSpan:
    """A still-unmapped entity over token indices; ``text`` is the surface
    form, consulted by per-instance remap overrides."""

    label: str
    token_start: int
    token_end: int
    text: str = ""


@dataclass
class RemapTable:
    """Maps source entity labels to one of the five kept types or to
    deletion (``None``).

    ``rules`` applies per label; ``overrides`` is keyed by
    ``(label, surface text)`` and wins over the label rule, which is how
    mixed-content source categories get their case-by-case treatment.
    """

    rules: dict[str, EntityType | None] = field(default_factory=dict)
    overrides: dict[tuple[str, str], EntityType | None] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rules = {k.strip().casefold(): v for k, v in self.rules.items()}
        self.overrides = {
            (label.strip().casefold(), text.strip().casefold()): v
            for (label, text), v in self.overrides.items()
        }

    def action_for(self, label: str, text: str = "") -> EntityType | None:
        """Resolve a label (raises ``KeyError`` when no rule exists)."""
        key = label.strip().casefold()
        if text:
            override = self.overrides.get((key, text.strip().casefold()), _MISSING)
            if override is not _MISSING:
                return override
        return self.rules[key]

    def merged_with(self, overlay: "RemapTable") -> "RemapTable":
        """New table where ``overlay`` rules win over this table's."""
        return RemapTable(rules={**self.rules, **overlay.rules},
                          overrides={**self.overrides, **overlay.overrides})


_MISSING = object()


def default_remap_table() -> RemapTable:
    """The built-in rule set.

    Identity rules keep the five target categories; region-like source
    labels collapse into locations and company-like ones into
    organizations.  Mixed-content financial categories default to money
    amounts, and geopolitical entities are dropped; both are meant to be
    refined with per-instance overrides in a table file.
    """
    per, loc, org, cur, money = EntityType
    rules: dict[str, EntityType | None] = {
        "persons": per, "person": per, "per": per,
        "locations": loc, "location": loc, "loc": loc,
        "organizations": org, "organization": org, "org": org,
        "currencies": cur, "currency": cur, "cur": cur,
        "money amounts": money, "money amount": money, "money": money,
        "world regions": loc, "countries": loc, "local regions": loc, "cities": loc,
        "agents": org, "associations": org, "medias": org, "companies": org,
        "shareholderships": money, "financing": money,
        "geopolitical entities": None,
    }
    return RemapTable(rules=rules)


_ACTIONS = {t.code: t for t in EntityType} | {"DELETE": None}
_RULE_RE = re.compile(r'^(?P<label>[^"=]+?)(?:\s*"(?P<text>[^"]*)")?\s*=\s*(?P<action>\S+)$')


def parse_remap_table(text: str, *, source: str = "remap table") -> RemapTable:
    """Parse the key/value rule file format.

    One rule per line: ``source_label = PER|LOC|ORG|CUR|MONEY|DELETE``,
    optionally with a quoted surface form for a per-instance override
    (``label "surface text" = ACTION``).  ``#`` starts a comment.
    """
    table = RemapTable()
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RULE_RE.match(line)
        if not m:
            raise ParseError(f"expected 'label = ACTION', found {raw_line.strip()!r}",
                             source=source, line=line_no)
        action_name = m.group("action").upper()
        if action_name not in _ACTIONS:
            raise ParseError(
                f"unknown action {m.group('action')!r} "
                f"(expected one of: {', '.join(_ACTIONS)})",
                source=source, line=line_no)
        action = _ACTIONS[action_name]
        label = m.group("label").strip().casefold()
        if m.group("text") is None:
            if label in table.rules:
                raise ParseError(f"duplicate rule for label {label!r}",
                                 source=source, line=line_no)
            table.rules[label] = action
        else:
            key = (label, m.group("text").strip().casefold())
            if key in table.overrides:
                raise ParseError(f"duplicate override for {key}", source=source, line=line_no)
            table.overrides[key] = action
    return table


def normalize_text(text: str) -> str:
    """Whitespace normalization: tabs, thin spaces and no-break spaces
    become ASCII spaces, and runs of spaces collapse to one.  Idempotent."""
    normalized, _ = normalize_with_entities(text, [])
    return normalized


def normalize_with_entities(text: str, entities: list[RawEntity]
                            ) -> tuple[str, list[RawEntity]]:
    """Normalize whitespace while re-computing annotation offsets.

    Entity character ranges are mapped through the edit; afterwards a
    single leading French determiner (le, la, les, l', un, une, des, du,
    de la) is stripped from the front of each annotation.  The running
    text itself is never touched by determiner stripping.  Annotations
    that end up empty are dropped.
    """
    out: list[str] = []
    new_pos: list[int | None] = []  # old index -> new index, None if collapsed away
    for ch in text:
        ch = " " if ch in _SPACE_EQUIVALENTS else ch
        if ch == " " and out and out[-1] == " ":
            new_pos.append(None)
        else:
            new_pos.append(len(out))
            out.append(ch)
    normalized = "".join(out)

    remapped: list[RawEntity] = []
    for entity in entities:
        if not (0 <= entity.start < entity.end <= len(text)):
            raise ValueError(f"entity {entity} out of range for text of length {len(text)}")
        start = next((new_pos[i] for i in range(entity.start, entity.end)
                      if new_pos[i] is not None), None)
        if start is None:
            continue
        end = next(new_pos[i] + 1 for i in range(entity.end - 1, entity.start - 1, -1)
                   if new_pos[i] is not None)
        m = _DETERMINER_RE.match(normalized, start, end)
        if m:
            start = m.end()
        if start < end:
            remapped.append(RawEntity(entity.label, start, end))
    return normalized, remapped


def remap_entities(entities: Iterable[LabeledSpan], table: RemapTable) -> list[EntitySpan]:
    """Apply the remap table: rewrite kept labels, drop deleted ones.

    Raises :class:`UnmappedLabelError` listing every label without a rule
    (all of them, not just the first) so a corpus can be fixed in one pass.
    """
    unmapped: list[str] = []
    result: list[EntitySpan] = []
    for span in entities:
        try:
            action = table.action_for(span.label, span.text)
        except KeyError:
            unmapped.append(span.label.strip().casefold())
            continue
        if action is not None:
            result.append(EntitySpan(action, span.token_start, span.token_end))
    if unmapped:
        raise UnmappedLabelError(unmapped)
    return result


def sentence_spans(text: str, protected_spans: Iterable[tuple[int, int]] = ()
                   ) -> list[tuple[int, int]]:
    """Character ranges (trimmed) of the sentences in ``text``.

    A sentence ends after ``.``, ``!`` or ``?`` when whitespace and then an
    uppercase letter or digit follow.  No cut is made inside a protected
    span, after a guarded abbreviation, or after a single-initial like
    ``J.``.
    """
    protected = list(protected_spans)
    n = len(text)
    boundaries: list[int] = []
    for i, ch in enumerate(text):
        if ch not in ".!?":
            continue
        j = i + 1
        if j >= n or not text[j].isspace():
            continue
        while j < n and text[j].isspace():
            j += 1
        if j >= n:
            continue
        following = text[j]
        if not (following.isdigit() or (following.isalpha() and following.isupper())):
            continue
        if ch == "." and _ends_with_abbreviation(text, i):
            continue
        cut = i + 1
        if any(s < cut < e for s, e in protected):
            continue
        boundaries.append(cut)

    spans: list[tuple[int, int]] = []
    prev = 0
    for boundary in boundaries + [n]:
        segment = text[prev:boundary]
        stripped = segment.strip()
        if stripped:
            left = prev + (len(segment) - len(segment.lstrip()))
            spans.append((left, left + len(stripped)))
        prev = boundary
    return spans


def _ends_with_abbreviation(text: str, dot_index: int) -> bool:
    k = dot_index
    while k > 0 and not text[k - 1].isspace():
        k -= 1
    word = text[k:dot_index + 1]
    if word in _ABBREVIATIONS:
        return True
    return len(word) == 2 and word[0].isalpha() and word[0].isupper()


def split_sentences(text: str, protected_spans: Iterable[tuple[int, int]] = ()) -> list[str]:
    """The sentences of ``text`` as trimmed strings."""
    return [text[s:e] for s, e in sentence_spans(text, protected_spans)]


def make_folds(items: "list | int", k: int, seed: int) -> list[list[int]]:
    """Partition item indices into ``k`` disjoint folds, reproducibly.

    The index list is shuffled by Fisher-Yates over a SplitMix64 stream
    seeded with ``seed``, then fold ``j`` takes shuffled positions
    ``j, j+k, j+2k, ...`` (so fold sizes differ by at most one).  Each fold
    is returned sorted.  ``items`` may be the item list itself or a count.
    """
    n = items if isinstance(items, int) else len(items)
    if k < 2:
        raise ValueError(f"fold count must be at least 2, got {k}")
    if k > n:
        raise ValueError(f"cannot split {n} sentences into {k} folds")
    indices = list(range(n))
    SplitMix64(seed).shuffle(indices)
    return [sorted(indices[j::k]) for j in range(k)]


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Whitespace tokens with their character ranges (end exclusive)."""
    return [(m.group(), m.start(), m.end()) for m in re.finditer(r"\S+", text)]


def char_span_to_token_span(token_offsets: list[tuple[str, int, int]],
                            start: int, end: int) -> tuple[int, int] | None:
    """Smallest token range covering the character range, or ``None`` when
    no token intersects it."""
    hit = [i for i, (_, ts, te) in enumerate(token_offsets) if ts < end and te > start]
    if not hit:
        return None
    return hit[0], hit[-1] + 1
