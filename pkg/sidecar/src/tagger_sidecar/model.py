"""Transformer token classifier wrapped to emit word-level distributions.

Loads any Hugging Face token-classification checkpoint (a local directory
or a hub id, e.g. a French NER model such as ``Jean-Baptiste/camembert-ner``).
Sentences arrive pre-tokenized into words; the model's sub-token
probabilities are pooled to word level by the first-sub-token policy: each
word's distribution is the softmax over the logits of its first sub-token.

The model's own label set is folded into the fixed wire vocabulary; any
label that maps to none of the five entity types (``MISC`` and friends)
contributes its probability mass to ``O``.
"""

from __future__ import annotations

import threading

import torch

# Wire vocabulary, in the protocol's canonical order.
LABELS: tuple[str, ...] = (
    "O",
    "B-PER", "I-PER",
    "B-LOC", "I-LOC",
    "B-ORG", "I-ORG",
    "B-CUR", "I-CUR",
    "B-MONEY", "I-MONEY",
)

# Spellings seen across public NER checkpoints, normalized to wire codes.
_TYPE_ALIASES = {
    "PER": "PER", "PERSON": "PER", "PERS": "PER",
    "LOC": "LOC", "LOCATION": "LOC", "GPE": "LOC",
    "ORG": "ORG", "ORGANIZATION": "ORG", "ORGANISATION": "ORG",
    "CUR": "CUR", "CURRENCY": "CUR",
    "MONEY": "MONEY", "MONEY_AMOUNT": "MONEY", "AMOUNT": "MONEY",
}


def _wire_label(model_label: str) -> str:
    """Map one model label to the wire vocabulary (``O`` when unmappable)."""
    label = model_label.strip().upper().replace("B_", "B-").replace("I_", "I-")
    if label == "O":
        return "O"
    prefix, _, entity = label.partition("-")
    if prefix in ("B", "I") and entity in _TYPE_ALIASES:
        return f"{prefix}-{_TYPE_ALIASES[entity]}"
    if label in _TYPE_ALIASES:  # unprefixed scheme: treat as span-opening
        return f"B-{_TYPE_ALIASES[label]}"
    return "O"


class WordTagger:
    """Thread-safe inference wrapper around a token-classification model."""

    def __init__(self, model_id: str, deterministic: bool = False):
        from transformers import AutoModelForTokenClassification, AutoTokenizer

        if deterministic:
            torch.manual_seed(0)
            torch.set_num_threads(1)
        self.deterministic = deterministic
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForTokenClassification.from_pretrained(model_id)
        self.model.eval()
        id2label = self.model.config.id2label
        self._wire_of_id = [_wire_label(id2label[i]) for i in range(len(id2label))]
        self._lock = threading.Lock()

    @property
    def labels(self) -> tuple[str, ...]:
        return LABELS

    def distributions(self, sentences: list[list[str]]) -> list[list[dict[str, float]]]:
        """One probability object per word, each summing to 1.

        Words the tokenizer cannot represent (or that fall past the model's
        maximum length) get a one-hot ``O``.
        """
        if not sentences:
            return []
        encoding = self.tokenizer(
            sentences, is_split_into_words=True, return_tensors="pt",
            padding=True, truncation=True)
        with self._lock, torch.no_grad():
            logits = self.model(**encoding).logits
        probs = torch.softmax(logits, dim=-1)

        result: list[list[dict[str, float]]] = []
        for index, words in enumerate(sentences):
            first_subtoken: dict[int, int] = {}
            for position, word_id in enumerate(encoding.word_ids(index)):
                if word_id is not None and word_id not in first_subtoken:
                    first_subtoken[word_id] = position
            rows: list[dict[str, float]] = []
            for word_index in range(len(words)):
                if word_index not in first_subtoken:
                    rows.append({"O": 1.0})
                    continue
                vector = probs[index, first_subtoken[word_index]]
                pooled: dict[str, float] = {}
                for label_id, p in enumerate(vector.tolist()):
                    wire = self._wire_of_id[label_id]
                    pooled[wire] = pooled.get(wire, 0.0) + p
                rows.append(pooled)
            result.append(rows)
        return result
