from pathlib import Path

import pytest

from rimegen import cli

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return ROOT / "data" / "corpus"


@pytest.fixture(scope="session")
def lexicon_path() -> Path:
    return ROOT / "data" / "lexicon_fr.tsv"


@pytest.fixture(scope="session")
def built(tmp_path_factory, corpus_dir, lexicon_path):
    """Cleaned corpus and trained model shared by CLI and acceptance tests."""
    base = tmp_path_factory.mktemp("pipeline")
    stanzas = base / "stanzas.jsonl"
    model = base / "model.rimegen"
    rc = cli.main(["clean", "--in", str(corpus_dir), "--out", str(stanzas)])
    assert rc == 0, "fixture corpus failed to clean"
    rc = cli.main(
        ["train", "--corpus", str(stanzas), "--out", str(model), "--order", "3", "--seed", "7"]
    )
    assert rc == 0, "fixture model failed to train"
    return {
        "stanzas": stanzas,
        "model": model,
        "corpus_dir": corpus_dir,
        "lexicon": lexicon_path,
    }
