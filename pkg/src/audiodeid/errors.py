"""Exception hierarchy shared across the package.

Every error raised on purpose derives from :class:`AudioDeidError` so the
CLI can catch one type, print the message to stderr, and exit nonzero.
"""


class AudioDeidError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AudioDeidError):
    """A file could not be parsed.

    Carries the source name and 1-based line number when known, so error
    messages point at the offending spot in the input.
    """

    def __init__(self, message: str, *, source: str = "", line: int | None = None):
        self.source = source
        self.line = line
        prefix = source or "input"
        if line is not None:
            prefix = f"{prefix}:{line}"
        super().__init__(f"{prefix}: {message}")


class ProtocolError(AudioDeidError):
    """An external tagger backend violated the wire protocol."""
