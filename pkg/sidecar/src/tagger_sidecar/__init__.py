"""HTTP sidecar serving word-level NER label distributions."""

from .model import LABELS, WordTagger

__version__ = "0.1.0"

__all__ = ["LABELS", "WordTagger", "__version__"]
