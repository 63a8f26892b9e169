"""Praat TextGrid reading and writing.

Reads both the long ("ooTextFile" with ``key = value`` lines) and the short
(bare values) variants; always writes the long variant.  Only interval
tiers are supported: point tiers are rejected, and intervals whose label is
empty (forced-aligner silence markers) are dropped on parse.  On output,
gaps between entries are filled with empty-label intervals so the file is a
valid, contiguous Praat tier.

Input may be UTF-8 (with or without BOM) or UTF-16 (either endianness,
with BOM), which covers what Praat and the common forced aligners emit.
Labels spanning multiple lines are not supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..core import TimeInterval, WordAlignment, check_alignment_order
from ..errors import ParseError

_BOUNDS_SLACK = 1e-9


@dataclass
class Tier:
    """A named interval tier; entries are sorted, non-overlapping words."""

    name: str
    entries: list[WordAlignment] = field(default_factory=list)


@dataclass
class TextGridDocument:
    xmin: float
    xmax: float
    tiers: list[Tier] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.xmin > self.xmax:
            raise ValueError(f"document xmin {self.xmin} exceeds xmax {self.xmax}")
        names = [t.name for t in self.tiers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate tier names: {names}")
        for tier in self.tiers:
            check_alignment_order(tier.entries, context=f"tier {tier.name!r}")
            for entry in tier.entries:
                if (entry.interval.start < self.xmin - _BOUNDS_SLACK
                        or entry.interval.end > self.xmax + _BOUNDS_SLACK):
                    raise ValueError(
                        f"tier {tier.name!r}: entry {entry.word!r} "
                        f"({entry.interval.start}, {entry.interval.end}) lies outside "
                        f"the document range ({self.xmin}, {self.xmax})"
                    )

    def tier(self, name: str) -> Tier:
        for tier in self.tiers:
            if tier.name == name:
                return tier
        available = ", ".join(repr(t.name) for t in self.tiers) or "none"
        raise KeyError(f"no tier named {name!r} (available: {available})")


def _decode(data: bytes, source: str) -> str:
    if data[:2] in (b"\xff\xfe", b"\xfe\xff"):
        encoding = "utf-16"
    elif data[:3] == b"\xef\xbb\xbf":
        encoding = "utf-8-sig"
    else:
        encoding = "utf-8"
    try:
        return data.decode(encoding)
    except UnicodeDecodeError as exc:
        raise ParseError(f"cannot decode as {encoding}: {exc}", source=source) from None


class _Reader:
    """Line cursor with 1-based numbering for error messages."""

    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.pos = 0
        self.source = source

    def error(self, message: str, line: int | None = None) -> ParseError:
        return ParseError(message, source=self.source, line=line if line is not None else self.pos)

    def next(self, expect: str) -> tuple[int, str]:
        while self.pos < len(self.lines):
            self.pos += 1
            line = self.lines[self.pos - 1].strip()
            if line:
                return self.pos, line
        raise self.error(f"unexpected end of file, expected {expect}")


_KEY_VALUE_RE = re.compile(r"^(?P<key>[^=]+?)\s*=\s*(?P<value>.*)$")


def _long_value(reader: _Reader, key: str) -> tuple[int, str]:
    """Consume a ``key = value`` line, tolerating Praat's prefixed forms
    like ``intervals: size = 3``."""
    line_no, line = reader.next(expect=f"'{key} = ...'")
    m = _KEY_VALUE_RE.match(line)
    if not m or not m.group("key").strip().endswith(key):
        raise reader.error(f"expected '{key} = ...', found {line!r}", line_no)
    return line_no, m.group("value").strip()


def _parse_number(reader: _Reader, line_no: int, raw: str, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise reader.error(f"invalid {what}: {raw!r}", line_no) from None


def _unquote(reader: _Reader, line_no: int, raw: str) -> str:
    if len(raw) < 2 or not raw.startswith('"'):
        raise reader.error(f"expected a quoted string, found {raw!r}", line_no)
    body = raw[1:-1]
    if not raw.endswith('"') or re.search(r'(?<!")"(?:"")*$', raw[1:]) is None:
        raise reader.error(
            "unterminated string (multi-line labels are not supported)", line_no
        )
    return body.replace('""', '"')


def _quote(text: str) -> str:
    return '"' + text.replace('"', '""') + '"'


def parse_textgrid(data: bytes, *, source: str = "textgrid") -> TextGridDocument:
    """Parse a Praat TextGrid file into a document of interval tiers.

    Raises :class:`ParseError` (with the offending line number) for
    malformed headers, point tiers, tier count mismatches, and
    non-monotone interval boundaries.
    """
    reader = _Reader(_decode(data, source), source)

    line_no, line = reader.next(expect="ooTextFile header")
    if line != 'File type = "ooTextFile"':
        raise reader.error(f'missing header \'File type = "ooTextFile"\', found {line!r}', line_no)
    line_no, line = reader.next(expect="TextGrid object class")
    if line != 'Object class = "TextGrid"':
        raise reader.error(f'missing header \'Object class = "TextGrid"\', found {line!r}', line_no)

    # Long files continue with "xmin = ..."; short files with a bare number.
    peek_no, peek = reader.next(expect="document xmin")
    reader.pos = peek_no - 1
    if _KEY_VALUE_RE.match(peek):
        return _parse_long(reader)
    return _parse_short(reader)


def _read_interval(reader, get_number, get_text, *, tier_name: str,
                   prev_end: float, entries: list[WordAlignment]) -> float:
    line_no, xmin = get_number("interval xmin")
    _, xmax = get_number("interval xmax")
    _, text = get_text()
    if xmax < xmin or xmin < prev_end - _BOUNDS_SLACK:
        raise reader.error(
            f"non-monotone interval boundaries in tier {tier_name!r}: "
            f"({xmin}, {xmax}) after end {prev_end}", line_no,
        )
    if text.strip():
        try:
            entries.append(WordAlignment(text, TimeInterval(xmin, xmax)))
        except ValueError as exc:
            raise reader.error(str(exc), line_no) from None
    return xmax


def _finish(reader: _Reader, xmin: float, xmax: float, tiers: list[Tier]) -> TextGridDocument:
    try:
        return TextGridDocument(xmin, xmax, tiers)
    except ValueError as exc:
        raise reader.error(str(exc)) from None


def _parse_long(reader: _Reader) -> TextGridDocument:
    line_no, raw = _long_value(reader, "xmin")
    xmin = _parse_number(reader, line_no, raw, "document xmin")
    line_no, raw = _long_value(reader, "xmax")
    xmax = _parse_number(reader, line_no, raw, "document xmax")

    line_no, line = reader.next(expect="'tiers? <exists>'")
    if not line.startswith("tiers?"):
        raise reader.error(f"expected 'tiers? <exists>', found {line!r}", line_no)
    if "<exists>" not in line:
        return _finish(reader, xmin, xmax, [])

    line_no, raw = _long_value(reader, "size")
    size = int(_parse_number(reader, line_no, raw, "tier count"))
    reader.next(expect="'item []:'")

    tiers: list[Tier] = []
    for index in range(1, size + 1):
        line_no, line = reader.next(expect=f"tier {index} of {size} ('item [{index}]:')")
        if not re.match(r"item\s*\[\d+\]\s*:", line):
            raise reader.error(
                f"tier count mismatch: header declared {size} tiers but tier {index} "
                f"starts with {line!r}", line_no)
        line_no, raw = _long_value(reader, "class")
        tier_class = _unquote(reader, line_no, raw)
        if tier_class != "IntervalTier":
            raise reader.error(
                f"unsupported tier class {tier_class!r} (point tiers are rejected)", line_no)
        line_no, raw = _long_value(reader, "name")
        name = _unquote(reader, line_no, raw)
        _long_value(reader, "xmin")
        _long_value(reader, "xmax")
        line_no, raw = _long_value(reader, "size")
        count = int(_parse_number(reader, line_no, raw, "interval count"))

        entries: list[WordAlignment] = []
        prev_end = float("-inf")

        def get_number(what: str) -> tuple[int, float]:
            key = what.split()[-1]  # "interval xmin" -> "xmin"
            n, raw = _long_value(reader, key)
            return n, _parse_number(reader, n, raw, what)

        def get_text() -> tuple[int, str]:
            n, raw = _long_value(reader, "text")
            return n, _unquote(reader, n, raw)

        for k in range(count):
            reader.next(expect=f"'intervals [{k + 1}]:'")
            prev_end = _read_interval(reader, get_number, get_text, tier_name=name,
                                      prev_end=prev_end, entries=entries)
        tiers.append(Tier(name, entries))

    return _finish(reader, xmin, xmax, tiers)


def _parse_short(reader: _Reader) -> TextGridDocument:
    def get_number(what: str) -> tuple[int, float]:
        line_no, line = reader.next(expect=what)
        return line_no, _parse_number(reader, line_no, line, what)

    def get_text(what: str = "quoted string") -> tuple[int, str]:
        line_no, line = reader.next(expect=what)
        return line_no, _unquote(reader, line_no, line)

    _, xmin = get_number("document xmin")
    _, xmax = get_number("document xmax")
    line_no, line = reader.next(expect="'<exists>'")
    if line != "<exists>":
        if line == "<absent>":
            return _finish(reader, xmin, xmax, [])
        raise reader.error(f"expected '<exists>', found {line!r}", line_no)
    line_no, raw = get_number("tier count")
    size = int(raw)

    tiers: list[Tier] = []
    for index in range(1, size + 1):
        try:
            line_no, tier_class = get_text(f"class of tier {index} of {size}")
        except ParseError:
            raise reader.error(
                f"tier count mismatch: header declared {size} tiers, "
                f"file ends after {index - 1}")
        if tier_class != "IntervalTier":
            raise reader.error(
                f"unsupported tier class {tier_class!r} (point tiers are rejected)", line_no)
        _, name = get_text("tier name")
        get_number("tier xmin")
        get_number("tier xmax")
        _, count_raw = get_number("interval count")
        count = int(count_raw)

        entries: list[WordAlignment] = []
        prev_end = float("-inf")
        for _ in range(count):
            prev_end = _read_interval(
                reader, get_number, get_text, tier_name=name,
                prev_end=prev_end, entries=entries)
        tiers.append(Tier(name, entries))

    return _finish(reader, xmin, xmax, tiers)


def write_textgrid(doc: TextGridDocument) -> bytes:
    """Serialize to long-format UTF-8; ``parse_textgrid`` reads it back to
    an equal document (times are emitted with full float precision)."""
    out = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        f"xmin = {doc.xmin!r}",
        f"xmax = {doc.xmax!r}",
    ]
    if not doc.tiers:
        out.append("tiers? <absent>")
        return ("\n".join(out) + "\n").encode("utf-8")

    out.append("tiers? <exists>")
    out.append(f"size = {len(doc.tiers)}")
    out.append("item []:")
    for index, tier in enumerate(doc.tiers, start=1):
        intervals = _fill_gaps(tier.entries, doc.xmin, doc.xmax)
        out.append(f"    item [{index}]:")
        out.append('        class = "IntervalTier"')
        out.append(f"        name = {_quote(tier.name)}")
        out.append(f"        xmin = {doc.xmin!r}")
        out.append(f"        xmax = {doc.xmax!r}")
        out.append(f"        intervals: size = {len(intervals)}")
        for k, (start, end, text) in enumerate(intervals, start=1):
            out.append(f"        intervals [{k}]:")
            out.append(f"            xmin = {start!r}")
            out.append(f"            xmax = {end!r}")
            out.append(f"            text = {_quote(text)}")
    return ("\n".join(out) + "\n").encode("utf-8")


def _fill_gaps(entries: list[WordAlignment], xmin: float, xmax: float
               ) -> list[tuple[float, float, str]]:
    """Praat tiers must be contiguous: pad gaps with empty-label intervals."""
    intervals: list[tuple[float, float, str]] = []
    cursor = xmin
    for entry in entries:
        if entry.interval.start > cursor:
            intervals.append((cursor, entry.interval.start, ""))
        intervals.append((entry.interval.start, entry.interval.end, entry.word))
        cursor = entry.interval.end
    if xmax > cursor:
        intervals.append((cursor, xmax, ""))
    return intervals
