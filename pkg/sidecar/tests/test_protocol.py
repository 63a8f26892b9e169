import pytest
from fastapi.testclient import TestClient

from tagger_sidecar.app import create_app
from tagger_sidecar.model import LABELS, WordTagger, _wire_label


@pytest.fixture(scope="module")
def client(model_dir):
    return TestClient(create_app(WordTagger(model_dir, deterministic=True)))


def test_health_contract(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["labels"] == list(LABELS)


def test_tag_shape_and_sums(client):
    sentences = [["bonjour", "jean", "dupont"], ["douze", "euros"]]
    response = client.post("/tag", json={"sentences": sentences})
    assert response.status_code == 200
    rows = response.json()["distributions"]
    assert [len(r) for r in rows] == [3, 2]
    for sentence in rows:
        for dist in sentence:
            assert set(dist) <= set(LABELS)
            assert all(0.0 <= p <= 1.0 + 1e-9 for p in dist.values())
            assert abs(sum(dist.values()) - 1.0) <= 1e-4


def test_empty_sentences_array(client):
    response = client.post("/tag", json={"sentences": []})
    assert response.status_code == 200
    assert response.json() == {"distributions": []}


def test_malformed_request_is_400(client):
    assert client.post("/tag", json={"sentences": "nope"}).status_code == 400
    assert client.post("/tag", json={}).status_code == 400
    assert client.post("/tag", content=b"not json",
                       headers={"Content-Type": "application/json"}).status_code == 400


def test_empty_token_is_400(client):
    response = client.post("/tag", json={"sentences": [["bonjour", " "]]})
    assert response.status_code == 400
    assert "token 1" in response.json()["error"]


def test_identical_requests_identical_responses(client):
    body = {"sentences": [["marie", "curie", "visite", "lyon"]]}
    first = client.post("/tag", json=body).json()
    second = client.post("/tag", json=body).json()
    assert first == second


def test_unknown_characters_still_covered(client):
    # a word the tokenizer cannot decompose must still get a distribution
    response = client.post("/tag", json={"sentences": [["日本語", "paris"]]})
    assert response.status_code == 200
    rows = response.json()["distributions"][0]
    assert len(rows) == 2
    assert abs(sum(rows[0].values()) - 1.0) <= 1e-4


def test_wire_label_mapping():
    assert _wire_label("B-PERSON") == "B-PER"
    assert _wire_label("i-organisation") == "I-ORG"
    assert _wire_label("MISC") == "O"
    assert _wire_label("B-DATE") == "O"
    assert _wire_label("LOC") == "B-LOC"
    assert _wire_label("O") == "O"


def test_alias_labels_fold_into_wire_vocabulary(alias_model_dir):
    tagger = WordTagger(alias_model_dir, deterministic=True)
    [rows] = tagger.distributions([["jean", "dupont"]])
    for dist in rows:
        assert set(dist) <= set(LABELS)
        assert abs(sum(dist.values()) - 1.0) <= 1e-6
        # the checkpoint's MISC mass has to land in O
        assert dist["O"] > 0.0


def test_cli_model_load_failure_exits_nonzero(capsys):
    from tagger_sidecar.cli import main
    assert main(["--model", "/nonexistent/model-dir", "--port", "1"]) == 1
    assert "cannot load model" in capsys.readouterr().err


def test_batch_padding_consistency(model_dir):
    # a sentence's distributions must not depend on its batch neighbours
    tagger = WordTagger(model_dir, deterministic=True)
    alone = tagger.distributions([["bonjour", "paris"]])[0]
    padded = tagger.distributions([["bonjour", "paris"],
                                   ["une", "phrase", "beaucoup", "plus", "longue",
                                    "pour", "forcer", "le", "padding"]])[0]
    for a, b in zip(alone, padded):
        assert set(a) == set(b)
        for label in a:
            assert a[label] == pytest.approx(b[label], abs=1e-5)
