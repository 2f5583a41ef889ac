import json
from pathlib import Path

import pytest

from normcluster import parse_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def sbert_corpus():
    return parse_corpus((FIXTURES / "corpora" / "toy-sbert.jsonl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def word_corpus():
    return parse_corpus((FIXTURES / "corpora" / "toy-word.jsonl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def gate_corpus():
    return parse_corpus((FIXTURES / "train_gate.jsonl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def article_text() -> str:
    return (FIXTURES / "article.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def article_embeddings():
    return parse_corpus((FIXTURES / "article_embeddings.jsonl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def article_gold() -> dict:
    return json.loads((FIXTURES / "gold_article.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def full_sweep_spec() -> dict:
    return json.loads((FIXTURES / "sweep_full.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fixture_sweep_spec() -> dict:
    return json.loads((FIXTURES / "sweep_fixture.json").read_text(encoding="utf-8"))
