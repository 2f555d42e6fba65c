"""Mel features, DTW, series/duration metrics, statistics, label scoring."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from prosomark.evaluate import (EvalError, FeatureMatrix, WarpPath, bonferroni,
                                confusion_scores, dtw_align, duration_metrics,
                                label_report, mel_features, mel_filterbank,
                                series_metrics, significance_tests,
                                warp_series)
from prosomark.ingest import Alignment, AudioBuffer, Interval, SILENCE_LABEL, Word
from prosomark.labeler import WordAnnotation

_LOG_FLOOR = math.log(1e-10)


def noise_audio(amp=0.01, dur=1.0, rate=16000, seed=0):
    rng = np.random.default_rng(seed)
    return AudioBuffer(samples=np.clip(amp * rng.normal(size=int(dur * rate)),
                                       -1, 1),
                       sample_rate=rate)


# ---------------------------------------------------------------------------
# mel features
# ---------------------------------------------------------------------------

def test_mel_frame_and_band_counts():
    feats = mel_features(noise_audio(dur=1.0))
    assert feats.features.shape == (98, 40)
    assert feats.hop == pytest.approx(0.010)


def test_mel_floor_on_silence():
    audio = AudioBuffer(samples=np.zeros(16000), sample_rate=16000)
    feats = mel_features(audio)
    np.testing.assert_allclose(feats.features, _LOG_FLOOR)


def test_mel_doubling_amplitude_adds_log_four():
    base = noise_audio(amp=0.01).samples
    a = mel_features(AudioBuffer(samples=base, sample_rate=16000))
    b = mel_features(AudioBuffer(samples=2.0 * base, sample_rate=16000))
    np.testing.assert_allclose(b.features - a.features, math.log(4.0),
                               atol=1e-6)


def test_mel_rejects_short_audio():
    audio = AudioBuffer(samples=np.zeros(100), sample_rate=16000)
    with pytest.raises(EvalError, match="shorter than one window"):
        mel_features(audio)


def test_mel_filterbank_shape_and_coverage():
    fbank = mel_filterbank(40, 400, 16000, 0.0, 8000.0)
    assert fbank.shape == (40, 201)
    assert np.all(fbank >= 0.0)
    assert np.all(fbank.sum(axis=1) > 0.0)   # no empty filter
    with pytest.raises(EvalError, match="band edges"):
        mel_filterbank(40, 400, 16000, 5000.0, 1000.0)


# ---------------------------------------------------------------------------
# DTW
# ---------------------------------------------------------------------------

def all_monotone_path_costs(dist: np.ndarray) -> list[float]:
    """Costs of every path from (0,0) to the far corner; test oracle."""
    n, m = dist.shape
    out: list[float] = []

    def walk(i, j, cost):
        cost += dist[i, j]
        if i == n - 1 and j == m - 1:
            out.append(cost)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, cost)
        if i + 1 < n:
            walk(i + 1, j, cost)
        if j + 1 < m:
            walk(i, j + 1, cost)

    walk(0, 0, 0.0)
    return out


def test_dtw_identical_inputs_align_diagonally():
    rng = np.random.default_rng(1)
    feats = FeatureMatrix(features=rng.normal(size=(30, 4)))
    path, cost = dtw_align(feats, feats)
    assert cost == pytest.approx(0.0, abs=1e-12)
    assert path.pairs == tuple((i, i) for i in range(30))


def test_dtw_one_dimensional_example():
    path, cost = dtw_align(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0]))
    assert cost == pytest.approx(1.0)
    assert path.pairs == ((0, 0), (1, 0), (2, 1))


def test_dtw_matches_exhaustive_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(25):
        n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        a = rng.integers(0, 10, size=n).astype(float)
        b = rng.integers(0, 10, size=m).astype(float)
        dist = np.abs(a[:, None] - b[None, :])
        _path, cost = dtw_align(a, b)
        assert cost == min(all_monotone_path_costs(dist))


def test_dtw_cost_is_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.normal(size=(int(rng.integers(3, 20)), 3))
        b = rng.normal(size=(int(rng.integers(3, 20)), 3))
        _, ab = dtw_align(a, b)
        _, ba = dtw_align(b, a)
        assert ab == pytest.approx(ba, abs=1e-9)


def test_dtw_path_cost_recomputes():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(25, 5))
    b = rng.normal(size=(19, 5))
    path, cost = dtw_align(a, b)
    recomputed = sum(float(np.linalg.norm(a[i] - b[j])) for i, j in path.pairs)
    assert recomputed == pytest.approx(cost, abs=1e-9)


def test_dtw_beats_pure_diagonal():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(40, 3))
    b = rng.normal(size=(40, 3))
    _, cost = dtw_align(a, b)
    diagonal = sum(float(np.linalg.norm(a[i] - b[i])) for i in range(40))
    assert cost <= diagonal + 1e-9


def test_dtw_band_count_mismatch():
    with pytest.raises(EvalError, match="band count"):
        dtw_align(np.zeros((5, 3)), np.zeros((5, 4)))


def test_warp_path_validation():
    with pytest.raises(EvalError, match="empty"):
        WarpPath(pairs=())
    with pytest.raises(EvalError, match="start at"):
        WarpPath(pairs=((1, 0), (2, 1)))
    with pytest.raises(EvalError, match="illegal warp step"):
        WarpPath(pairs=((0, 0), (2, 1)))
    with pytest.raises(EvalError, match="illegal warp step"):
        WarpPath(pairs=((0, 0), (0, 0)))


def test_warp_series_first_match_rule():
    path = WarpPath(pairs=((0, 0), (1, 0), (2, 1)))
    ref, syn = warp_series(path, np.array([10.0, 11.0, 12.0]),
                           np.array([20.0, 21.0]))
    np.testing.assert_allclose(ref, [10.0, 11.0, 12.0])
    np.testing.assert_allclose(syn, [20.0, 20.0, 21.0])


def test_warp_series_output_lengths_follow_reference():
    rng = np.random.default_rng(6)
    a = rng.normal(size=(15, 2))
    b = rng.normal(size=(9, 2))
    path, _ = dtw_align(a, b)
    ref, syn = warp_series(path, rng.normal(size=15), rng.normal(size=9))
    assert len(ref) == len(syn) == 15


def test_warp_series_too_short():
    path = WarpPath(pairs=((0, 0), (1, 1)))
    with pytest.raises(EvalError, match="shorter"):
        warp_series(path, np.zeros(1), np.zeros(2))


# ---------------------------------------------------------------------------
# series metrics
# ---------------------------------------------------------------------------

def test_series_metrics_identity():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    m = series_metrics(x, x)
    assert m.rmse == 0.0
    assert m.correlation == pytest.approx(1.0)
    assert m.n == 4


def test_series_metrics_correlation_example():
    m = series_metrics(np.array([1.0, 2.0, 3.0, 4.0]),
                       np.array([1.0, 3.0, 2.0, 4.0]))
    assert m.correlation == pytest.approx(0.8, abs=1e-9)


def test_series_metrics_masked_rmse_example():
    m = series_metrics(np.array([0.0, 0.0, 7.0]), np.array([3.0, 4.0, 7.0]),
                       mask=np.array([True, True, False]))
    assert m.rmse == pytest.approx(math.sqrt(12.5), abs=1e-9)
    assert m.n == 2
    assert m.correlation is None   # masked ref side is constant


def test_series_metrics_zero_variance_side():
    m = series_metrics(np.array([2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0]))
    assert m.correlation is None
    assert m.rmse == pytest.approx(math.sqrt(2 / 3))


def test_series_metrics_too_few_pairs():
    with pytest.raises(EvalError, match="at least 3"):
        series_metrics(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(EvalError, match="at least 3"):
        series_metrics(np.ones(5), np.ones(5),
                       mask=np.array([True, False, False, False, False]))


def test_series_metrics_shape_checks():
    with pytest.raises(EvalError, match="length mismatch"):
        series_metrics(np.ones(4), np.ones(5))
    with pytest.raises(EvalError, match="mask length"):
        series_metrics(np.ones(4), np.ones(4), mask=np.ones(3, dtype=bool))


def test_series_metrics_invariances():
    rng = np.random.default_rng(7)
    for _ in range(10):
        x = rng.normal(size=50)
        y = rng.normal(size=50)
        a = float(rng.uniform(0.1, 5.0))
        b, c = rng.normal(size=2)
        base = series_metrics(x, y)
        scaled = series_metrics(a * x + b, y)
        assert scaled.correlation == pytest.approx(base.correlation, abs=1e-9)
        shifted = series_metrics(x + c, y + c)
        assert shifted.rmse == pytest.approx(base.rmse, abs=1e-9)


# ---------------------------------------------------------------------------
# duration metrics
# ---------------------------------------------------------------------------

def make_alignment(utt_id, phone_durs, labels=None):
    # three words over the phones: one, one, and the rest
    labels = labels or [f"p{i}" for i in range(len(phone_durs))]
    t = 0.1
    phones = [Interval(label=SILENCE_LABEL, start=0.0, end=0.1)]
    for lb, d in zip(labels, phone_durs):
        phones.append(Interval(label=lb, start=t, end=t + d))
        t += d
    spans = [(1, 2), (2, 3), (3, len(phones))]
    words = tuple(
        Word(label=f"w{i}", start=phones[lo].start, end=phones[hi - 1].end,
             phone_span=(lo, hi))
        for i, (lo, hi) in enumerate(spans))
    return Alignment(utterance_id=utt_id, words=words, phones=tuple(phones))


def test_duration_metrics_identity():
    al = make_alignment("u", [0.1, 0.2, 0.15, 0.25])
    out = duration_metrics(al, al)
    assert out["phone"].rmse == 0.0
    assert out["phone"].correlation == pytest.approx(1.0)
    assert out["word"].rmse == 0.0


def test_duration_metrics_constant_shift():
    ref = make_alignment("r", [0.10, 0.20, 0.15, 0.25])
    syn = make_alignment("s", [0.11, 0.21, 0.16, 0.26])
    out = duration_metrics(ref, syn)
    assert out["phone"].rmse == pytest.approx(0.010, abs=1e-9)
    assert out["phone"].correlation == pytest.approx(1.0, abs=1e-9)
    assert out["phone"].n == 4


def test_duration_metrics_substitution_drops_pair():
    ref = make_alignment("r", [0.1, 0.2, 0.15, 0.25])
    syn = make_alignment("s", [0.1, 0.2, 0.15, 0.25],
                         labels=["p0", "pX", "p2", "p3"])
    out = duration_metrics(ref, syn)
    assert out["phone"].n == 3


def test_duration_metrics_too_few_matches():
    ref = make_alignment("r", [0.1, 0.2, 0.15, 0.25])
    syn = make_alignment("s", [0.1, 0.2, 0.15, 0.25],
                         labels=["x0", "x1", "x2", "x3"])
    with pytest.raises(EvalError, match="matched intervals"):
        duration_metrics(ref, syn)


# ---------------------------------------------------------------------------
# significance
# ---------------------------------------------------------------------------

def test_anova_worked_example():
    result = significance_tests({"a": [1.0, 2.0, 3.0], "b": [2.0, 3.0, 4.0],
                                 "c": [3.0, 4.0, 5.0]})
    assert result.f_stat == pytest.approx(3.0, abs=1e-9)
    assert result.p_value == pytest.approx(0.125, abs=1e-9)
    assert result.df_between == 2
    assert result.df_within == 6
    assert len(result.pairwise) == 3


def test_anova_identical_groups():
    result = significance_tests({"a": [2.0, 2.0], "b": [2.0, 2.0]})
    assert result.f_stat == 0.0
    assert result.p_value == 1.0


def test_anova_distinct_constant_groups():
    result = significance_tests({"a": [1.0, 1.0], "b": [2.0, 2.0]})
    assert math.isinf(result.f_stat)
    assert result.p_value == 0.0


def test_anova_matches_scipy():
    rng = np.random.default_rng(8)
    groups = {f"g{i}": rng.normal(i * 0.3, 1.0, size=12) for i in range(3)}
    result = significance_tests(groups)
    f, p = scipy_stats.f_oneway(*groups.values())
    assert result.f_stat == pytest.approx(float(f), rel=1e-9)
    assert result.p_value == pytest.approx(float(p), rel=1e-6)


def test_pairwise_t_matches_scipy():
    rng = np.random.default_rng(9)
    a = rng.normal(0.0, 1.0, size=15)
    b = rng.normal(0.5, 1.0, size=11)
    result = significance_tests({"a": a, "b": b})
    cmp = result.pairwise[0]
    t, p = scipy_stats.ttest_ind(a, b, equal_var=True)
    assert cmp.t_stat == pytest.approx(float(t), rel=1e-9)
    assert cmp.p_raw == pytest.approx(float(p), rel=1e-6)
    assert cmp.p_adjusted == cmp.p_raw   # one pair, no correction


def test_bonferroni_examples():
    assert bonferroni(0.01, 5) == pytest.approx(0.05, abs=1e-12)
    assert bonferroni(0.4, 5) == 1.0
    with pytest.raises(EvalError):
        bonferroni(0.01, 0)


def test_pairwise_count_and_adjustment():
    rng = np.random.default_rng(10)
    groups = {f"g{i}": rng.normal(size=8) for i in range(4)}
    result = significance_tests(groups)
    assert len(result.pairwise) == 6
    for cmp in result.pairwise:
        assert cmp.p_adjusted == pytest.approx(min(1.0, cmp.p_raw * 6))


def test_group_order_does_not_change_f():
    rng = np.random.default_rng(11)
    groups = {name: rng.normal(size=9) for name in ("x", "y", "z")}
    fwd = significance_tests(groups)
    rev = significance_tests(dict(reversed(groups.items())))
    assert rev.f_stat == pytest.approx(fwd.f_stat, rel=1e-12)
    fwd_pairs = {frozenset((c.group_a, c.group_b)): c.p_raw
                 for c in fwd.pairwise}
    rev_pairs = {frozenset((c.group_a, c.group_b)): c.p_raw
                 for c in rev.pairwise}
    for key, p in fwd_pairs.items():
        assert rev_pairs[key] == pytest.approx(p, rel=1e-12)


def test_significance_validation():
    with pytest.raises(EvalError, match="two groups"):
        significance_tests({"a": [1.0, 2.0]})
    with pytest.raises(EvalError, match="two values"):
        significance_tests({"a": [1.0], "b": [1.0, 2.0]})
    with pytest.raises(EvalError, match="non-finite"):
        significance_tests({"a": [1.0, math.nan], "b": [1.0, 2.0]})


# ---------------------------------------------------------------------------
# label report
# ---------------------------------------------------------------------------

def anns(p_classes, b_classes):
    return [WordAnnotation(word=f"w{i}", start=0.0, end=0.1, prominence=0.0,
                           boundary=0.0, p_class=p, b_class=b)
            for i, (p, b) in enumerate(zip(p_classes, b_classes))]


def test_confusion_scores_worked_example():
    scores = confusion_scores([0, 0, 1, 1, 2, 2], [0, 0, 1, 0, 2, 1])
    assert scores.accuracy == pytest.approx(4 / 6)
    assert scores.confusion == ((2, 0, 0), (1, 1, 0), (0, 1, 1))
    assert scores.precision[0] == pytest.approx(2 / 3)
    assert scores.recall[0] == pytest.approx(1.0)
    assert scores.f1[0] == pytest.approx(0.8)
    assert scores.precision[1] == pytest.approx(0.5)
    assert scores.recall[1] == pytest.approx(0.5)
    assert scores.f1[1] == pytest.approx(0.5)
    assert scores.precision[2] == pytest.approx(1.0)
    assert scores.recall[2] == pytest.approx(0.5)
    assert scores.f1[2] == pytest.approx(2 / 3)
    assert scores.support == (2, 2, 2)
    assert scores.zero_division == ()


def test_confusion_scores_perfect_prediction():
    scores = confusion_scores([0, 1, 2, 1], [0, 1, 2, 1])
    assert scores.accuracy == 1.0
    assert scores.precision == (1.0, 1.0, 1.0)
    assert scores.recall == (1.0, 1.0, 1.0)
    assert scores.f1 == (1.0, 1.0, 1.0)


def test_confusion_scores_flags_zero_division():
    scores = confusion_scores([0, 0, 0], [0, 0, 0])
    assert scores.precision[1] == 0.0
    assert "precision[1]" in scores.zero_division
    assert "recall[2]" in scores.zero_division


def test_confusion_scores_validation():
    with pytest.raises(EvalError, match="differ in length"):
        confusion_scores([0, 1], [0])
    with pytest.raises(EvalError, match="no labels"):
        confusion_scores([], [])
    with pytest.raises(EvalError, match="outside"):
        confusion_scores([0, 3], [0, 1])


def test_label_report_marginals():
    oracle = {"u1": anns([0, 0, 1], [0, 1, 2]),
              "u2": anns([1, 2, 2], [0, 0, 1])}
    predicted = {"u1": anns([0, 1, 1], [0, 1, 1]),
                 "u2": anns([1, 2, 1], [0, 1, 1])}
    report = label_report(oracle, predicted)
    assert report.n_words == 6
    assert report.n_utterances == 2
    # confusion rows sum to oracle class counts
    assert [sum(r) for r in report.prominence.confusion] == [2, 2, 2]
    assert sum(sum(r) for r in report.boundary.confusion) == 6


def test_label_report_identity(corpus_dir):
    from prosomark.labeler import read_annotations_jsonl, \
        annotations_to_record, write_annotations_jsonl
    from prosomark.corpus import batch_annotate
    from prosomark.corpus import CorpusIndex
    index = CorpusIndex.from_directory(corpus_dir)
    records, _ = batch_annotate(index)
    path = corpus_dir / "self.jsonl"
    write_annotations_jsonl(path, records)
    labels = read_annotations_jsonl(path)
    report = label_report(labels, labels)
    assert report.prominence.accuracy == 1.0
    assert report.boundary.accuracy == 1.0


def test_label_report_word_count_mismatch():
    oracle = {"u9": anns([0, 1], [0, 0])}
    predicted = {"u9": anns([0], [0])}
    with pytest.raises(EvalError, match="u9"):
        label_report(oracle, predicted)


def test_label_report_no_shared_ids():
    with pytest.raises(EvalError, match="no utterances shared"):
        label_report({"a": anns([0], [0])}, {"b": anns([0], [0])})
