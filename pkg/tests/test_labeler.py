"""Word labeling: score assignment, discretization, and the JSONL format."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from prosomark.config import Config, config_hash
from prosomark.ingest import (Alignment, AudioBuffer, Interval, SILENCE_LABEL,
                              Word, parse_tsv_alignment, read_audio)
from prosomark.labeler import (LabelError, Thresholds, WordAnnotation,
                               analyze_utterance, annotate_utterance,
                               annotations_to_record, assign_word_scores,
                               discretize, read_annotations_jsonl,
                               record_to_annotations, write_annotations_jsonl)
from prosomark.wavelet import Line, LinePoint


def ridge(t, strength, frame_period=0.005):
    pt = LinePoint(scale=0, frame=round(t / frame_period), amplitude=strength)
    return Line(polarity="ridge", points=(pt,), strength=strength)


def valley(t, strength, frame_period=0.005):
    pt = LinePoint(scale=0, frame=round(t / frame_period), amplitude=-strength)
    return Line(polarity="valley", points=(pt,), strength=strength)


def words_alignment(*spans, silences=()):
    words = [Word(label=f"w{i}", start=s, end=e)
             for i, (s, e) in enumerate(spans)]
    words += [Word(label=SILENCE_LABEL, start=s, end=e) for s, e in silences]
    words.sort(key=lambda w: w.start)
    return Alignment(utterance_id="t", words=tuple(words), phones=())


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------

def test_discretize_examples():
    cuts = (0.5, 1.5)
    assert discretize(0.2, cuts) == 0
    assert discretize(0.7, cuts) == 1
    assert discretize(2.0, cuts) == 2
    # cut points are lower-inclusive
    assert discretize(0.5, cuts) == 1
    assert discretize(1.5, cuts) == 2


def test_discretize_rejects_negative():
    with pytest.raises(LabelError, match="non-negative"):
        discretize(-0.1, (0.5, 1.5))


@given(st.floats(min_value=0.0, max_value=10.0),
       st.floats(min_value=0.0, max_value=10.0))
def test_discretize_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert discretize(lo, (0.4, 1.0)) <= discretize(hi, (0.4, 1.0))


def test_thresholds_validation():
    with pytest.raises(LabelError, match="t1 < t2"):
        Thresholds(prominence=(1.0, 0.4))
    assert Thresholds().boundary == (0.35, 0.9)


# ---------------------------------------------------------------------------
# score assignment
# ---------------------------------------------------------------------------

def test_ridge_goes_to_containing_word():
    al = words_alignment((0.40, 0.70), (0.70, 1.00))
    scores = assign_word_scores([ridge(0.50, 2.0)], [], al, 0.005)
    assert scores == [(2.0, 0.0), (0.0, 0.0)]


def test_word_keeps_strongest_ridge():
    al = words_alignment((0.0, 1.0))
    scores = assign_word_scores([ridge(0.2, 1.0), ridge(0.6, 3.0)], [], al, 0.005)
    assert scores == [(3.0, 0.0)]


def test_ridge_interval_is_half_open():
    al = words_alignment((0.0, 0.5), (0.5, 1.0))
    scores = assign_word_scores([ridge(0.5, 2.0)], [], al, 0.005)
    assert scores == [(0.0, 0.0), (2.0, 0.0)]


def test_valley_attaches_to_nearest_word_end():
    al = words_alignment((0.40, 0.80), (0.80, 1.50))
    scores = assign_word_scores([], [valley(0.79, 1.2)], al, 0.005)
    assert scores == [(0.0, 1.2), (0.0, 0.0)]


def test_valley_tie_goes_to_earlier_word():
    al = words_alignment((0.0, 0.5), (0.5, 1.0))
    scores = assign_word_scores([], [valley(0.75, 1.0)], al, 0.005)
    assert scores == [(0.0, 1.0), (0.0, 0.0)]


def test_valley_inside_pause_attaches_to_preceding_word():
    al = words_alignment((0.0, 0.5), (0.9, 1.4), silences=[(0.5, 0.9)])
    # anchor well inside the pause but nearer the following word's span
    scores = assign_word_scores([], [valley(0.88, 2.0)], al, 0.005)
    assert scores == [(0.0, 2.0), (0.0, 0.0)]


def test_valley_in_leading_silence_is_dropped():
    al = words_alignment((0.5, 1.0), silences=[(0.0, 0.5)])
    scores = assign_word_scores([], [valley(0.2, 2.0)], al, 0.005)
    assert scores == [(0.0, 0.0)]


def test_no_lines_gives_zero_scores():
    al = words_alignment((0.0, 0.5), (0.5, 1.0))
    assert assign_word_scores([], [], al, 0.005) == [(0.0, 0.0), (0.0, 0.0)]


def test_silence_only_alignment_is_an_error():
    al = Alignment(utterance_id="s",
                   words=(Word(label=SILENCE_LABEL, start=0.0, end=1.0),),
                   phones=())
    with pytest.raises(LabelError, match="non-silence"):
        assign_word_scores([], [], al, 0.005)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def first_entry(corpus_dir):
    wav = sorted((corpus_dir / "wavs").glob("*.wav"))[0]
    align = corpus_dir / "align" / f"{wav.stem}.words.tsv"
    return read_audio(wav), parse_tsv_alignment(align)


def test_analyze_utterance_structure(corpus_dir):
    audio, alignment = first_entry(corpus_dir)
    analysis = analyze_utterance(audio, alignment)
    n_words = len(alignment.non_silence_words())
    assert len(analysis.words) == n_words
    n = len(analysis.prominence_signal)
    assert len(analysis.boundary_signal) == n
    assert analysis.prominence_scalogram.n_frames == n
    assert analysis.prominence_scalogram.coefficients.shape[0] == 13
    for a in analysis.words:
        assert a.prominence >= 0.0 and a.boundary >= 0.0
        assert a.p_class in (0, 1, 2) and a.b_class in (0, 1, 2)


def test_annotate_utterance_is_repeatable(corpus_dir):
    audio, alignment = first_entry(corpus_dir)
    assert annotate_utterance(audio, alignment) == annotate_utterance(audio, alignment)


def test_classes_match_thresholds(corpus_dir):
    audio, alignment = first_entry(corpus_dir)
    cfg = Config()
    for a in annotate_utterance(audio, alignment, cfg):
        assert a.p_class == discretize(a.prominence, cfg.prominence_thresholds)
        assert a.b_class == discretize(a.boundary, cfg.boundary_thresholds)


def test_raising_thresholds_never_raises_classes(corpus_dir):
    audio, alignment = first_entry(corpus_dir)
    low = annotate_utterance(audio, alignment, Config())
    high_cfg = Config(prominence_thresholds=(0.8, 2.0),
                      boundary_thresholds=(0.7, 1.8))
    high = annotate_utterance(audio, alignment, high_cfg)
    for a, b in zip(low, high):
        assert b.p_class <= a.p_class
        assert b.b_class <= a.b_class


def test_alignment_audio_length_mismatch(corpus_dir):
    audio, alignment = first_entry(corpus_dir)
    stretched = Alignment(
        utterance_id=alignment.utterance_id,
        words=alignment.words + (Word(label="ghost", start=audio.duration + 1.0,
                                      end=audio.duration + 2.0),),
        phones=alignment.phones)
    with pytest.raises(LabelError, match="alignment ends"):
        analyze_utterance(audio, stretched)


# ---------------------------------------------------------------------------
# JSONL records
# ---------------------------------------------------------------------------

def annotation(word="w", p=0.5, b=0.2, pc=1, bc=0):
    return WordAnnotation(word=word, start=0.0, end=0.5, prominence=p,
                          boundary=b, p_class=pc, b_class=bc)


def test_record_roundtrip(tmp_path):
    records = [
        annotations_to_record("u1", [annotation("a"), annotation("b", p=1.25, pc=2)],
                              "abc123def456"),
        annotations_to_record("u2", [annotation("c")], "abc123def456"),
    ]
    path = tmp_path / "ann.jsonl"
    write_annotations_jsonl(path, records)
    back = read_annotations_jsonl(path)
    assert list(back) == ["u1", "u2"]
    assert back["u1"][1].prominence == pytest.approx(1.25)
    assert back["u1"][1].p_class == 2
    assert back["u2"][0].word == "c"


def test_record_rounds_to_four_decimals():
    rec = annotations_to_record("u", [annotation(p=0.123456)], "0" * 12)
    assert rec["words"][0]["prominence"] == 0.1235


def test_duplicate_utterance_id(tmp_path):
    rec = annotations_to_record("dup", [annotation()], "0" * 12)
    path = tmp_path / "dup.jsonl"
    write_annotations_jsonl(path, [rec, rec])
    with pytest.raises(LabelError, match="duplicate"):
        read_annotations_jsonl(path)


def test_malformed_record():
    with pytest.raises(LabelError, match="malformed"):
        record_to_annotations({"id": "u", "words": [{"w": "a"}]})


def test_invalid_json_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "u", "words": []}\n{oops\n', encoding="utf-8")
    with pytest.raises(LabelError, match="invalid JSON"):
        read_annotations_jsonl(path)
