"""Synthetic corpus generator: layout, design invariants, determinism."""

from __future__ import annotations

import filecmp
import json

import pytest

from prosomark.fixtures import generate_corpus, load_design
from prosomark.ingest import load_lexicon, parse_alignment, read_audio


def test_layout_and_design_roundtrip(corpus_dir, corpus_designs):
    assert (corpus_dir / "wavs").is_dir()
    assert (corpus_dir / "align").is_dir()
    assert (corpus_dir / "metadata.csv").exists()
    assert (corpus_dir / "lexicon.dict").exists()
    assert len(corpus_designs) == 20
    raw = json.loads((corpus_dir / "design.json").read_text())
    assert [d.to_dict() for d in corpus_designs] == raw["utterances"]


def test_design_invariants(corpus_designs):
    for design in corpus_designs:
        n = len(design.words)
        joints = design.pause_joints
        # joints index the gap after word j; all interior
        assert all(0 <= j < n - 1 for j in joints)
        assert list(joints) == sorted(joints)
        # never adjacent: each pause needs room to be resolved separately
        assert all(b - a >= 2 for a, b in zip(joints, joints[1:]))
        # emphasized and deaccented words never touch a pause
        pause_adjacent = {w for j in joints for w in (j, j + 1)}
        for idx in design.emphasized + design.deaccented:
            assert idx not in pause_adjacent
        assert not set(design.emphasized) & set(design.deaccented)
        assert set(design.internal_joints) | set(joints) == set(range(n - 1))


def test_every_word_is_two_syllables(corpus_dir, corpus_designs):
    lexicon = load_lexicon(corpus_dir / "lexicon.dict")
    for design in corpus_designs:
        for word in design.words:
            phones = lexicon.lookup(word)
            vowels = [p for p in phones if p[-1].isdigit()]
            assert len(vowels) == 2, word


def test_alignment_times_on_frame_grid(corpus_dir, corpus_designs):
    alignment = parse_alignment(
        corpus_dir / "align" / f"{corpus_designs[0].utterance_id}.words.tsv")
    for word in alignment.words:
        for t in (word.start, word.end):
            assert round(t / 0.005) * 0.005 == pytest.approx(t, abs=1e-9)


def test_audio_matches_alignment_span(corpus_dir, corpus_designs):
    for design in corpus_designs[:3]:
        audio = read_audio(corpus_dir / "wavs" / f"{design.utterance_id}.wav")
        alignment = parse_alignment(
            corpus_dir / "align" / f"{design.utterance_id}.words.tsv")
        assert audio.sample_rate == 16000
        assert audio.duration == pytest.approx(alignment.words[-1].end,
                                               abs=0.001)


def test_generation_is_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    designs_a = generate_corpus(a, count=3, seed=9)
    designs_b = generate_corpus(b, count=3, seed=9)
    assert [d.to_dict() for d in designs_a] == [d.to_dict() for d in designs_b]
    for rel in ("metadata.csv", "lexicon.dict", "design.json"):
        assert filecmp.cmp(a / rel, b / rel, shallow=False), rel
    for wav in sorted((a / "wavs").glob("*.wav")):
        assert filecmp.cmp(wav, b / "wavs" / wav.name, shallow=False)


def test_seed_changes_output(tmp_path):
    designs_a = generate_corpus(tmp_path / "a", count=3, seed=1)
    designs_b = generate_corpus(tmp_path / "b", count=3, seed=2)
    assert ([d.to_dict() for d in designs_a]
            != [d.to_dict() for d in designs_b])


def test_load_design_matches_generation(tmp_path):
    designs = generate_corpus(tmp_path, count=2, seed=5)
    loaded = load_design(tmp_path / "design.json")
    assert [d.to_dict() for d in loaded] == [d.to_dict() for d in designs]
    assert loaded[0].internal_joints == designs[0].internal_joints


@pytest.mark.parametrize("kwargs", [{"count": 0}, {"sample_rate": 22050}])
def test_generation_rejects_bad_parameters(tmp_path, kwargs):
    with pytest.raises(ValueError):
        generate_corpus(tmp_path, **kwargs)
