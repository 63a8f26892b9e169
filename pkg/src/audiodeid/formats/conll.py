"""CoNLL-style BIO files: ``token<TAB>tag`` lines, one blank line between
sentences, UTF-8, LF endings, no document markers."""

from __future__ import annotations

from ..core import LABELS, OUTSIDE, EntityType
from ..corpus_prep import RemapTable
from ..errors import ParseError

Sentence = tuple[list[str], list[str]]

_VALID_TAGS = set(LABELS)
_CODES = {t.code for t in EntityType}


def parse_conll(data: bytes, remap: RemapTable | None = None, *,
                source: str = "conll") -> list[Sentence]:
    """Parse into ``(tokens, bio_tags)`` sentences in file order.

    Tags outside the ``O`` / ``B-*`` / ``I-*`` vocabulary are resolved
    through ``remap`` when given (a deleted type becomes ``O``); without a
    matching rule they are a parse error.  Only the tab is a delimiter, so
    tokens may contain spaces; a token containing a tab is an error.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}", source=source) from None

    sentences: list[Sentence] = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush() -> None:
        if tokens:
            sentences.append((tokens.copy(), tags.copy()))
            tokens.clear()
            tags.clear()

    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if "\t" not in line:
            raise ParseError(f"expected 'token<TAB>tag', found {line!r}",
                             source=source, line=line_no)
        token, _, tag = line.rpartition("\t")
        if "\t" in token:
            raise ParseError(f"token contains a tab: {token!r}", source=source, line=line_no)
        if not token:
            raise ParseError("empty token", source=source, line=line_no)
        tokens.append(token)
        tags.append(_resolve_tag(tag.strip(), remap, source, line_no))
    flush()
    return sentences


def _resolve_tag(tag: str, remap: RemapTable | None, source: str, line_no: int) -> str:
    if tag in _VALID_TAGS:
        return tag
    prefix, _, label = tag.partition("-")
    if prefix in ("B", "I") and label and remap is not None:
        try:
            action = remap.action_for(label)
        except KeyError:
            pass
        else:
            return OUTSIDE if action is None else f"{prefix}-{action.code}"
    raise ParseError(f"unknown tag {tag!r} (no remap rule)", source=source, line=line_no)


def write_conll(sentences: list[Sentence]) -> bytes:
    """Serialize sentences; ``parse_conll`` reads the output back equal."""
    blocks: list[str] = []
    for tokens, tags in sentences:
        if len(tokens) != len(tags):
            raise ValueError(f"{len(tokens)} tokens but {len(tags)} tags")
        if not tokens:
            raise ValueError("cannot write an empty sentence")
        lines = []
        for token, tag in zip(tokens, tags):
            if not token or "\t" in token or "\n" in token:
                raise ValueError(f"token not writable as CoNLL: {token!r}")
            if tag not in _VALID_TAGS:
                raise ValueError(f"tag outside vocabulary: {tag!r}")
            lines.append(f"{token}\t{tag}")
        blocks.append("\n".join(lines))
    if not blocks:
        return b""
    return ("\n\n".join(blocks) + "\n").encode("utf-8")
