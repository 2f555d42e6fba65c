"""Objective evaluation of synthesized prosody against references.

Reference and synthesized utterances are aligned by dynamic time warping
over log-mel features; f0 and energy series are compared on the warped
common timeline, durations come from the alignments, and per-system score
distributions are compared with a one-way ANOVA plus Bonferroni-corrected
pairwise t-tests. Predicted prominence/boundary labels score against oracle
labels with per-class precision/recall/F1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .ingest import Alignment, AudioBuffer
from .labeler import WordAnnotation

MEL_WINDOW = 0.025
MEL_HOP = 0.010
_LOG_FLOOR = 1e-10


class EvalError(ValueError):
    """Evaluation preconditions violated."""


# ---------------------------------------------------------------------------
# mel features
# ---------------------------------------------------------------------------

def _hz_to_mel(hz: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def _mel_to_hz(mel: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_bands: int, n_fft: int, sample_rate: int,
                   fmin: float, fmax: float) -> np.ndarray:
    """Triangular filters on a mel-spaced grid, [n_bands, n_fft//2 + 1]."""
    if not 0 <= fmin < fmax <= sample_rate / 2:
        raise EvalError(f"band edges ({fmin}, {fmax}) invalid for "
                        f"sample rate {sample_rate}")
    edges_mel = np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_bands + 2)
    edges_hz = np.asarray(_mel_to_hz(edges_mel))
    bin_freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    weights = np.zeros((n_bands, len(bin_freqs)))
    for b in range(n_bands):
        lo, center, hi = edges_hz[b], edges_hz[b + 1], edges_hz[b + 2]
        rising = (bin_freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - bin_freqs) / max(hi - center, 1e-12)
        weights[b] = np.maximum(0.0, np.minimum(rising, falling))
    return weights


@dataclass(frozen=True)
class FeatureMatrix:
    """Log-mel frames [n_frames, n_bands] with their hop in seconds."""

    features: np.ndarray
    hop: float = MEL_HOP

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise EvalError("feature matrix must be non-empty and 2-D")
        self.features.flags.writeable = False

    @property
    def n_frames(self) -> int:
        return self.features.shape[0]


def mel_features(audio: AudioBuffer, n_bands: int = 40, fmin: float = 0.0,
                 fmax: float = 8000.0) -> FeatureMatrix:
    """Log-mel spectrogram: 25 ms Hann windows every 10 ms, left-aligned.

    A buffer of n samples yields ``(n - win) // hop + 1`` frames, so 1 s at
    16 kHz gives exactly 98. The filterbank is applied to the power spectrum
    and floored before the log.
    """
    sr = audio.sample_rate
    fmax = min(fmax, sr / 2)
    win = round(MEL_WINDOW * sr)
    hop = round(MEL_HOP * sr)
    n = len(audio)
    if n < win:
        raise EvalError(f"audio ({n} samples) shorter than one window ({win})")
    n_frames = (n - win) // hop + 1
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = audio.samples[idx] * np.hanning(win)[None, :]
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    fbank = mel_filterbank(n_bands, win, sr, fmin, fmax)
    mel = np.log(np.maximum(power @ fbank.T, _LOG_FLOOR))
    return FeatureMatrix(features=mel, hop=MEL_HOP)


# ---------------------------------------------------------------------------
# dynamic time warping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarpPath:
    """Monotone frame pairing from (0, 0) to (n-1, m-1)."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise EvalError("empty warp path")
        if self.pairs[0] != (0, 0):
            raise EvalError("warp path must start at (0, 0)")
        for (i0, j0), (i1, j1) in zip(self.pairs, self.pairs[1:]):
            step = (i1 - i0, j1 - j0)
            if step not in ((1, 0), (0, 1), (1, 1)):
                raise EvalError(f"illegal warp step {step}")


def dtw_align(ref: FeatureMatrix | np.ndarray,
              syn: FeatureMatrix | np.ndarray) -> tuple[WarpPath, float]:
    """Align two feature sequences; returns the path and its total cost.

    Frame distance is Euclidean; steps are diagonal, vertical, horizontal,
    all unit cost weight. Cost ties during backtracking resolve diagonal
    first, then vertical (reference advance), then horizontal, so identical
    inputs align along the exact diagonal.
    """
    a = ref.features if isinstance(ref, FeatureMatrix) else np.atleast_2d(
        np.asarray(ref, dtype=np.float64).T).T
    b = syn.features if isinstance(syn, FeatureMatrix) else np.atleast_2d(
        np.asarray(syn, dtype=np.float64).T).T
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise EvalError("feature matrices must be 2-D with equal band count")
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        raise EvalError("cannot align empty sequences")

    diff = a[:, None, :] - b[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    acc = np.empty((n, m))
    acc[0] = np.cumsum(dist[0])
    for i in range(1, n):
        # acc[i, j] = dist[i, j] + min(acc[i-1, j-1], acc[i-1, j], acc[i, j-1]);
        # the horizontal dependency resolves via a running minimum trick.
        up = acc[i - 1]
        best_prev = np.minimum(up, np.concatenate(([np.inf], up[:-1])))
        entry = dist[i] + best_prev
        prefix = np.cumsum(dist[i])
        acc[i] = np.minimum.accumulate(entry - prefix) + prefix

    pairs = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        pairs.append((i, j))
    pairs.reverse()
    return WarpPath(pairs=tuple(pairs)), float(acc[n - 1, m - 1])


def warp_series(path: WarpPath, ref_series: np.ndarray,
                syn_series: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project a synthesized per-frame series onto the reference timeline.

    Each reference frame takes the synthesized value at the first path pair
    that visits it, so the output arrays both have one entry per reference
    frame.
    """
    ref_series = np.asarray(ref_series)
    syn_series = np.asarray(syn_series)
    n = path.pairs[-1][0] + 1
    m = path.pairs[-1][1] + 1
    if len(ref_series) < n or len(syn_series) < m:
        raise EvalError("series shorter than the warp path endpoints")
    first_j = np.full(n, -1, dtype=int)
    for i, j in path.pairs:
        if first_j[i] < 0:
            first_j[i] = j
    return ref_series[:n].copy(), syn_series[first_j]


# ---------------------------------------------------------------------------
# series and duration metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesMetrics:
    """RMSE and Pearson correlation over n compared pairs."""

    rmse: float
    correlation: float | None
    n: int

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "correlation": self.correlation, "n": self.n}


def series_metrics(ref: np.ndarray, syn: np.ndarray,
                   mask: np.ndarray | None = None) -> SeriesMetrics:
    """Compare two equal-length series, optionally masked.

    Correlation is None when either side has zero variance. The series must
    hold at least 3 pairs, of which the mask must keep at least 2.
    """
    ref = np.asarray(ref, dtype=np.float64)
    syn = np.asarray(syn, dtype=np.float64)
    if ref.shape != syn.shape:
        raise EvalError(f"series length mismatch: {ref.shape} vs {syn.shape}")
    total = len(ref)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != ref.shape:
            raise EvalError("mask length mismatch")
        ref, syn = ref[mask], syn[mask]
    n = len(ref)
    if total < 3 or n < 2:
        raise EvalError(f"need at least 3 pairs with 2 unmasked, "
                        f"got {n} of {total}")
    rmse = float(np.sqrt(np.mean((ref - syn) ** 2)))
    ref_c = ref - ref.mean()
    syn_c = syn - syn.mean()
    denom = math.sqrt(float(ref_c @ ref_c) * float(syn_c @ syn_c))
    correlation = float(ref_c @ syn_c / denom) if denom > 1e-30 else None
    return SeriesMetrics(rmse=rmse, correlation=correlation, n=n)


def _levenshtein_pairs(ref: list[str], syn: list[str]) -> list[tuple[int, int]]:
    """Indices of equal-label pairs under a minimal edit alignment.

    Backtracking prefers matches, then substitutions, then deletions;
    substituted positions contribute no pair.
    """
    n, m = len(ref), len(syn)
    dp = np.zeros((n + 1, m + 1), dtype=int)
    dp[:, 0] = np.arange(n + 1)
    dp[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dp[i - 1, j - 1] + (ref[i - 1] != syn[j - 1])
            dp[i, j] = min(sub, dp[i - 1, j] + 1, dp[i, j - 1] + 1)
    pairs: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 and j > 0:
        match = ref[i - 1] == syn[j - 1]
        if dp[i, j] == dp[i - 1, j - 1] + (not match):
            if match:
                pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif dp[i, j] == dp[i - 1, j] + 1:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def duration_metrics(ref: Alignment, syn: Alignment) -> dict[str, SeriesMetrics]:
    """Phone- and word-level duration RMSE/correlation between alignments.

    Silences are dropped. Identical label sequences pair positionally;
    otherwise pairs come from a minimal edit alignment and only matched
    (equal-label) positions are compared.
    """
    out: dict[str, SeriesMetrics] = {}
    for level, ref_ivs, syn_ivs in (
            ("phone", ref.phones, syn.phones),
            ("word", ref.words, syn.words)):
        ref_sp = [(iv.label, iv.duration) for iv in ref_ivs if not iv.is_silence]
        syn_sp = [(iv.label, iv.duration) for iv in syn_ivs if not iv.is_silence]
        ref_labels = [lb for lb, _ in ref_sp]
        syn_labels = [lb for lb, _ in syn_sp]
        if ref_labels == syn_labels:
            idx_pairs = list(zip(range(len(ref_sp)), range(len(syn_sp))))
        else:
            idx_pairs = _levenshtein_pairs(ref_labels, syn_labels)
        if len(idx_pairs) < 3:
            raise EvalError(
                f"{level} level: only {len(idx_pairs)} matched intervals "
                f"between {ref.utterance_id!r} and {syn.utterance_id!r}")
        r = np.array([ref_sp[i][1] for i, _ in idx_pairs])
        s = np.array([syn_sp[j][1] for _, j in idx_pairs])
        out[level] = series_metrics(r, s)
    return out


# ---------------------------------------------------------------------------
# significance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairwiseComparison:
    """Bonferroni-adjusted two-sample pooled-variance t-test."""

    group_a: str
    group_b: str
    t_stat: float
    p_raw: float
    p_adjusted: float

    def to_dict(self) -> dict:
        return {"a": self.group_a, "b": self.group_b, "t": self.t_stat,
                "p_raw": self.p_raw, "p_adjusted": self.p_adjusted}


@dataclass(frozen=True)
class SignificanceResult:
    """One-way ANOVA over k groups plus all pairwise comparisons."""

    f_stat: float
    p_value: float
    df_between: int
    df_within: int
    pairwise: tuple[PairwiseComparison, ...] = ()

    def to_dict(self) -> dict:
        return {"f": self.f_stat, "p": self.p_value,
                "df_between": self.df_between, "df_within": self.df_within,
                "pairwise": [c.to_dict() for c in self.pairwise]}


def _f_p_value(f: float, df1: int, df2: int) -> float:
    """Upper-tail F probability via the regularized incomplete beta."""
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    x = df2 / (df2 + df1 * f)
    return float(betainc(df2 / 2.0, df1 / 2.0, x))


def _t_p_value(t: float, df: int) -> float:
    """Two-sided t probability via the regularized incomplete beta."""
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return float(betainc(df / 2.0, 0.5, x))


def bonferroni(p_raw: float, n_comparisons: int) -> float:
    """Family-wise adjusted p: the raw p times the comparison count, clipped to 1."""
    if n_comparisons < 1:
        raise EvalError("need at least one comparison")
    return min(1.0, p_raw * n_comparisons)


def significance_tests(groups: dict[str, np.ndarray | list[float]]) -> SignificanceResult:
    """One-way ANOVA and Bonferroni-corrected pairwise t-tests.

    Needs at least two groups of at least two values each. All groups
    identical and constant yields F=0, p=1; distinct constant groups yield
    F=inf, p=0.
    """
    names = list(groups)
    if len(names) < 2:
        raise EvalError("need at least two groups")
    data = {name: np.asarray(groups[name], dtype=np.float64) for name in names}
    for name, values in data.items():
        if values.ndim != 1 or len(values) < 2:
            raise EvalError(f"group {name!r} needs at least two values")
        if not np.all(np.isfinite(values)):
            raise EvalError(f"group {name!r} contains non-finite values")

    total = np.concatenate(list(data.values()))
    grand = total.mean()
    ss_between = sum(len(v) * (v.mean() - grand) ** 2 for v in data.values())
    ss_within = sum(float(((v - v.mean()) ** 2).sum()) for v in data.values())
    df1 = len(names) - 1
    df2 = len(total) - len(names)
    scale = max(float(np.abs(total).max()) ** 2, 1e-30)
    if ss_between <= 1e-12 * scale:
        f_stat, p_value = 0.0, 1.0
    elif ss_within <= 1e-12 * scale:
        f_stat, p_value = math.inf, 0.0
    else:
        f_stat = (ss_between / df1) / (ss_within / df2)
        p_value = _f_p_value(f_stat, df1, df2)

    comparisons = []
    pairs = [(a, b) for ai, a in enumerate(names) for b in names[ai + 1:]]
    m = len(pairs)
    for a, b in pairs:
        va, vb = data[a], data[b]
        na, nb = len(va), len(vb)
        df = na + nb - 2
        pooled = (float(((va - va.mean()) ** 2).sum())
                  + float(((vb - vb.mean()) ** 2).sum())) / df
        se = math.sqrt(pooled * (1.0 / na + 1.0 / nb))
        delta = float(va.mean() - vb.mean())
        if se <= 1e-15 * max(1.0, abs(delta)):
            t_stat = 0.0 if abs(delta) <= 1e-30 else math.inf * np.sign(delta)
            p_raw = 1.0 if t_stat == 0.0 else 0.0
        else:
            t_stat = delta / se
            p_raw = _t_p_value(t_stat, df)
        comparisons.append(PairwiseComparison(
            group_a=a, group_b=b, t_stat=float(t_stat), p_raw=p_raw,
            p_adjusted=bonferroni(p_raw, m)))
    return SignificanceResult(f_stat=float(f_stat), p_value=float(p_value),
                              df_between=df1, df_within=df2,
                              pairwise=tuple(comparisons))


# ---------------------------------------------------------------------------
# label report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassScores:
    """Per-class precision/recall/F1 plus accuracy for one label kind."""

    confusion: tuple[tuple[int, ...], ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    accuracy: float
    support: tuple[int, ...]
    zero_division: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"confusion": [list(r) for r in self.confusion],
                "precision": list(self.precision), "recall": list(self.recall),
                "f1": list(self.f1), "accuracy": self.accuracy,
                "support": list(self.support),
                "zero_division": list(self.zero_division)}


@dataclass(frozen=True)
class LabelReport:
    """Prominence and boundary scoring of predicted vs oracle labels."""

    prominence: ClassScores
    boundary: ClassScores
    n_words: int
    n_utterances: int

    def to_dict(self) -> dict:
        return {"prominence": self.prominence.to_dict(),
                "boundary": self.boundary.to_dict(),
                "n_words": self.n_words, "n_utterances": self.n_utterances}


def confusion_scores(oracle: list[int], predicted: list[int],
                     n_classes: int = 3) -> ClassScores:
    """Score one label stream; confusion rows are oracle, columns predicted."""
    if len(oracle) != len(predicted):
        raise EvalError("label streams differ in length")
    if not oracle:
        raise EvalError("no labels to score")
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    for o, p in zip(oracle, predicted):
        if not (0 <= o < n_classes and 0 <= p < n_classes):
            raise EvalError(f"label outside 0..{n_classes - 1}: ({o}, {p})")
        confusion[o, p] += 1
    precision, recall, f1 = [], [], []
    flags: list[str] = []
    for c in range(n_classes):
        tp = int(confusion[c, c])
        pred_c = int(confusion[:, c].sum())
        orac_c = int(confusion[c, :].sum())
        if pred_c == 0:
            precision.append(0.0)
            flags.append(f"precision[{c}]")
        else:
            precision.append(tp / pred_c)
        if orac_c == 0:
            recall.append(0.0)
            flags.append(f"recall[{c}]")
        else:
            recall.append(tp / orac_c)
        if precision[-1] + recall[-1] == 0.0:
            f1.append(0.0)
            if pred_c != 0 and orac_c != 0:
                flags.append(f"f1[{c}]")
        else:
            f1.append(2 * precision[-1] * recall[-1]
                      / (precision[-1] + recall[-1]))
    accuracy = float(np.trace(confusion)) / len(oracle)
    return ClassScores(
        confusion=tuple(tuple(int(x) for x in row) for row in confusion),
        precision=tuple(precision), recall=tuple(recall), f1=tuple(f1),
        accuracy=accuracy,
        support=tuple(int(confusion[c, :].sum()) for c in range(n_classes)),
        zero_division=tuple(flags))


def label_report(oracle: dict[str, list[WordAnnotation]],
                 predicted: dict[str, list[WordAnnotation]]) -> LabelReport:
    """Score predictions against oracle labels, words matched by position.

    Utterance ids present in both sides are compared; differing word counts
    for a shared id are an error, as is an empty intersection.
    """
    common = [u for u in oracle if u in predicted]
    if not common:
        raise EvalError("no utterances shared between oracle and predictions")
    o_p, p_p, o_b, p_b = [], [], [], []
    n_words = 0
    for utt_id in common:
        o_words = oracle[utt_id]
        p_words = predicted[utt_id]
        if len(o_words) != len(p_words):
            raise EvalError(
                f"word count mismatch for {utt_id!r}: "
                f"{len(o_words)} oracle vs {len(p_words)} predicted")
        n_words += len(o_words)
        o_p += [w.p_class for w in o_words]
        p_p += [w.p_class for w in p_words]
        o_b += [w.b_class for w in o_words]
        p_b += [w.b_class for w in p_words]
    return LabelReport(prominence=confusion_scores(o_p, p_p),
                       boundary=confusion_scores(o_b, p_b),
                       n_words=n_words, n_utterances=len(common))
