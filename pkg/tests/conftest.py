"""Shared fixtures: one synthesized corpus per test run, plus a demo lexicon."""

from __future__ import annotations

import pytest

from prosomark.config import Config
from prosomark.corpus import CorpusIndex
from prosomark.fixtures import generate_corpus, load_design
from prosomark.ingest import load_lexicon

DEMO_LEXICON = """\
;;; demo entries
I AY1
INSIST IH2 N S IH1 S T
THAT DH AE1 T
THAT(2) DH AH0 T
A AH0
"""


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Default 20-utterance synthetic corpus, generated once per run."""
    root = tmp_path_factory.mktemp("corpus")
    generate_corpus(root, count=20, seed=42)
    return root


@pytest.fixture(scope="session")
def corpus_index(corpus_dir):
    return CorpusIndex.from_directory(corpus_dir)


@pytest.fixture(scope="session")
def corpus_designs(corpus_dir):
    return load_design(corpus_dir / "design.json")


@pytest.fixture(scope="session")
def default_config():
    return Config()


@pytest.fixture()
def demo_lexicon(tmp_path):
    path = tmp_path / "demo.dict"
    path.write_text(DEMO_LEXICON, encoding="utf-8")
    return load_lexicon(path)
