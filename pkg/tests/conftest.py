from __future__ import annotations

import pytest

from corpusgen import write_corpus
from sheetqa.dataset import ingest_corpus


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus-small")
    write_corpus(directory, 120, seed=11, broken_every=15)
    return directory


@pytest.fixture(scope="session")
def small_index(small_corpus_dir):
    return ingest_corpus(small_corpus_dir)
