"""Session fixtures: tiny local checkpoints so the protocol and pooling
paths run through the real transformers loading/inference code without any
network access."""

import string

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers
from tokenizers.processors import TemplateProcessing
from transformers import (
    BertConfig,
    BertForTokenClassification,
    PreTrainedTokenizerFast,
)

from tagger_sidecar.model import LABELS


def build_tiny_checkpoint(path: str, labels: list[str], seed: int = 0) -> str:
    """Character-level WordPiece + one-layer BERT with random (seeded)
    weights, saved in standard checkpoint layout."""
    pieces = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    pieces += list(string.ascii_lowercase)
    pieces += ["##" + c for c in string.ascii_lowercase]
    pieces += list("éèêàâçùûôîï'-,0123456789")
    pieces += ["##" + c for c in "éèêàâçùûôîï'-,0123456789"]
    vocab = {piece: i for i, piece in enumerate(pieces)}

    backend = Tokenizer(models.WordPiece(
        vocab=vocab, unk_token="[UNK]", continuing_subword_prefix="##"))
    backend.normalizer = normalizers.Lowercase()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])])
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
        model_max_length=512)

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=64,
        max_position_embeddings=512, num_labels=len(labels),
        id2label=dict(enumerate(labels)),
        label2id={label: i for i, label in enumerate(labels)})
    model = BertForTokenClassification(config)
    model.eval()

    tokenizer.save_pretrained(path)
    model.save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory) -> str:
    return build_tiny_checkpoint(
        str(tmp_path_factory.mktemp("tiny-model")), list(LABELS))


@pytest.fixture(scope="session")
def alias_model_dir(tmp_path_factory) -> str:
    """Checkpoint whose label set uses foreign spellings plus MISC, to
    exercise the wire-vocabulary folding."""
    return build_tiny_checkpoint(
        str(tmp_path_factory.mktemp("alias-model")),
        ["O", "B-PERSON", "I-PERSON", "B-ORGANISATION", "I-ORGANISATION", "MISC"],
        seed=1)
