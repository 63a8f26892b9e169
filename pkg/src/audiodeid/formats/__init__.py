"""On-disk formats: Praat TextGrid, CoNLL BIO, entity JSON, 16-bit PCM WAV.

All parsers are pure byte-string -> value functions and may be called
concurrently for different files.
"""

from .conll import Sentence, parse_conll, write_conll
from .entjson import parse_entities_json, write_entities_json
from .textgrid import TextGridDocument, Tier, parse_textgrid, write_textgrid
from .wavpcm import AudioBuffer, read_wav, write_wav

__all__ = [
    "AudioBuffer",
    "Sentence",
    "TextGridDocument",
    "Tier",
    "parse_conll",
    "parse_entities_json",
    "parse_textgrid",
    "read_wav",
    "write_conll",
    "write_entities_json",
    "write_textgrid",
    "write_wav",
]
