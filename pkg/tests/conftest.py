"""Shared fixtures: a small prepared synthetic corpus reused across modules."""

import numpy as np
import pytest

from linglab.data import IngestConfig, ingest
from linglab.synth import synth_corpus, synth_lexicons, write_corpus
from linglab.textstats import DEFAULT_SCHEMA


@pytest.fixture(scope="session")
def small_prepared(tmp_path_factory):
    root = tmp_path_factory.mktemp("small_corpus")
    corpus_path = root / "corpus.jsonl"
    write_corpus(synth_corpus(np.random.default_rng(909), 400), corpus_path)
    return ingest(
        corpus_path,
        root / "prepared",
        DEFAULT_SCHEMA,
        synth_lexicons(),
        IngestConfig(max_len=100, min_freq=1),
    )
