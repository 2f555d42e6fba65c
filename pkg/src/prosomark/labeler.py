"""Word-level prominence and boundary labeling.

The full pipeline: extract pitch/energy/duration signals, z-normalize,
combine into a prominence signal (weighted sum) and a boundary signal
(rescaled product), wavelet-transform both, track ridge lines in the word
band and valley lines in the phrase band, assign line strengths to words,
and discretize each strength to classes 0/1/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .config import Config
from .ingest import AudioBuffer, Alignment, Word
from .signals import (ProsodicSignal, combine_boundary, combine_prominence,
                      duration_signal, extract_energy, extract_f0,
                      frame_count, pitch_to_semitones, znorm)
from .wavelet import Line, ScaleBank, Scalogram, cwt, track_lines

# Audio may end slightly before the alignment does (trailing silence was
# trimmed); more than this is a mismatched pair.
_DURATION_SLACK = 0.050


class LabelError(ValueError):
    """Labeling preconditions violated."""


@dataclass(frozen=True)
class Thresholds:
    """Class cut points: value < t1 -> 0, t1 <= value < t2 -> 1, else 2."""

    prominence: tuple[float, float] = (0.4, 1.0)
    boundary: tuple[float, float] = (0.35, 0.9)

    def __post_init__(self) -> None:
        for name in ("prominence", "boundary"):
            t1, t2 = getattr(self, name)
            if not t1 < t2:
                raise LabelError(f"{name} thresholds must satisfy t1 < t2")


def discretize(value: float, cut_points: tuple[float, float]) -> int:
    """Map a non-negative strength to class 0, 1, or 2 (lower-inclusive)."""
    if value < 0:
        raise LabelError(f"strength must be non-negative, got {value}")
    t1, t2 = cut_points
    if value < t1:
        return 0
    if value < t2:
        return 1
    return 2


@dataclass(frozen=True)
class WordAnnotation:
    """One labeled word: continuous strengths and their classes."""

    word: str
    start: float
    end: float
    prominence: float
    boundary: float
    p_class: int
    b_class: int


def assign_word_scores(ridges: list[Line], valleys: list[Line],
                       alignment: Alignment,
                       frame_period: float) -> list[tuple[float, float]]:
    """Attach line strengths to words.

    A word's prominence is the strongest ridge whose anchor falls inside
    [start, end); words without a ridge score 0. A valley marks the boundary
    after a word: valleys anchored inside a silence interval attach to the
    preceding non-silence word, others to the word whose end time is nearest
    the anchor (earlier word on ties). Each word keeps its strongest valley.

    Returns one (prominence, boundary) pair per non-silence word.
    """
    words = alignment.non_silence_words()
    if not words:
        raise LabelError("alignment has no non-silence words")
    prominence = [0.0] * len(words)
    boundary = [0.0] * len(words)

    for ridge in ridges:
        t = ridge.anchor_frame * frame_period
        for wi, word in enumerate(words):
            if word.start <= t < word.end:
                prominence[wi] = max(prominence[wi], ridge.strength)
                break

    for valley in valleys:
        t = valley.anchor_frame * frame_period
        wi = _boundary_owner(t, words, alignment)
        if wi is not None:
            boundary[wi] = max(boundary[wi], valley.strength)

    return list(zip(prominence, boundary))


def _boundary_owner(t: float, words: tuple[Word, ...],
                    alignment: Alignment) -> int | None:
    for interval in alignment.words:
        if interval.is_silence and interval.start <= t < interval.end:
            # Inside a pause: the boundary belongs to the word before it.
            preceding = [wi for wi, w in enumerate(words)
                         if w.end <= interval.start + 1e-9]
            return preceding[-1] if preceding else None
    distances = [(abs(w.end - t), wi) for wi, w in enumerate(words)]
    return min(distances)[1]


@dataclass(frozen=True)
class UtteranceAnalysis:
    """Everything the pipeline computed for one utterance."""

    utterance_id: str
    words: tuple[WordAnnotation, ...]
    prominence_signal: ProsodicSignal
    boundary_signal: ProsodicSignal
    f0: ProsodicSignal
    energy: ProsodicSignal
    duration: ProsodicSignal
    prominence_scalogram: Scalogram
    boundary_scalogram: Scalogram
    ridges: tuple[Line, ...]
    valleys: tuple[Line, ...]


def analyze_utterance(audio: AudioBuffer, alignment: Alignment,
                      config: Config | None = None) -> UtteranceAnalysis:
    """Run the full labeling pipeline, keeping intermediates."""
    cfg = config or Config()
    if alignment.end > audio.duration + _DURATION_SLACK:
        raise LabelError(
            f"{alignment.utterance_id}: alignment ends at {alignment.end:.3f}s "
            f"but audio lasts {audio.duration:.3f}s")

    hop = max(1, round(cfg.frame_period * audio.sample_rate))
    n_frames = frame_count(len(audio), hop)

    track = extract_f0(audio, f0_min=cfg.f0_min, f0_max=cfg.f0_max,
                       voicing_threshold=cfg.voicing_threshold,
                       frame_period=cfg.frame_period)
    f0 = pitch_to_semitones(track)
    energy = extract_energy(audio, frame_period=cfg.frame_period,
                            band=cfg.energy_band)
    duration = duration_signal(alignment, n_frames,
                               frame_period=cfg.frame_period)

    f0n, energyn, durationn = znorm(f0), znorm(energy), znorm(duration)
    prominence_signal = combine_prominence(f0n, energyn, durationn,
                                           weights=cfg.weights)
    boundary_signal = combine_boundary(f0n, energyn, durationn)

    bank = ScaleBank.geometric(cfg.period_min, cfg.period_max,
                               cfg.scales_per_octave)
    prominence_scalogram = cwt(prominence_signal, bank)
    boundary_scalogram = cwt(boundary_signal, bank)
    ridges = track_lines(prominence_scalogram, "ridge",
                         bank.band(*cfg.word_band),
                         link_window_factor=cfg.link_window_factor)
    valleys = track_lines(boundary_scalogram, "valley",
                          bank.band(*cfg.phrase_band),
                          link_window_factor=cfg.link_window_factor)

    scores = assign_word_scores(ridges, valleys, alignment, cfg.frame_period)
    thresholds = Thresholds(prominence=cfg.prominence_thresholds,
                            boundary=cfg.boundary_thresholds)
    words = tuple(
        WordAnnotation(word=w.label, start=w.start, end=w.end,
                       prominence=p, boundary=b,
                       p_class=discretize(p, thresholds.prominence),
                       b_class=discretize(b, thresholds.boundary))
        for w, (p, b) in zip(alignment.non_silence_words(), scores))
    return UtteranceAnalysis(
        utterance_id=alignment.utterance_id, words=words,
        prominence_signal=prominence_signal, boundary_signal=boundary_signal,
        f0=f0, energy=energy, duration=duration,
        prominence_scalogram=prominence_scalogram,
        boundary_scalogram=boundary_scalogram,
        ridges=tuple(ridges), valleys=tuple(valleys))


def annotate_utterance(audio: AudioBuffer, alignment: Alignment,
                       config: Config | None = None) -> list[WordAnnotation]:
    """Label one utterance; returns one annotation per non-silence word."""
    return list(analyze_utterance(audio, alignment, config).words)


# ---------------------------------------------------------------------------
# JSONL records
# ---------------------------------------------------------------------------

def annotations_to_record(utterance_id: str,
                          annotations: Iterable[WordAnnotation],
                          config_hash: str) -> dict:
    """JSON-ready record; times and strengths round to 4 decimals."""
    return {
        "id": utterance_id,
        "words": [
            {"w": a.word, "start": round(a.start, 4), "end": round(a.end, 4),
             "prominence": round(a.prominence, 4),
             "boundary": round(a.boundary, 4),
             "p": a.p_class, "b": a.b_class}
            for a in annotations
        ],
        "config_hash": config_hash,
    }


def record_to_annotations(record: dict) -> tuple[str, list[WordAnnotation]]:
    try:
        words = [
            WordAnnotation(word=w["w"], start=float(w["start"]),
                           end=float(w["end"]),
                           prominence=float(w["prominence"]),
                           boundary=float(w["boundary"]),
                           p_class=int(w["p"]), b_class=int(w["b"]))
            for w in record["words"]
        ]
        return record["id"], words
    except (KeyError, TypeError) as exc:
        raise LabelError(f"malformed annotation record: {exc}") from exc


def write_annotations_jsonl(path: str | Path,
                            records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_annotations_jsonl(path: str | Path) -> dict[str, list[WordAnnotation]]:
    """Map utterance id to its word annotations; duplicate ids error."""
    out: dict[str, list[WordAnnotation]] = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LabelError(f"{path}:{ln}: invalid JSON") from exc
            utt_id, words = record_to_annotations(record)
            if utt_id in out:
                raise LabelError(f"{path}:{ln}: duplicate utterance id {utt_id!r}")
            out[utt_id] = words
    return out
