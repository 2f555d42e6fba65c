"""Corpus indexing and batch processing.

A corpus is a directory of ``wavs/*.wav`` plus ``align/`` TextGrid or TSV
alignments (and optionally ``metadata.csv`` transcripts), or an explicit
JSONL manifest. Batch annotation distributes utterances over worker
processes but always writes records in index order, so output bytes do not
depend on the degree of parallelism.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Config, config_hash
from .evaluate import (dtw_align, duration_metrics, label_report,
                       mel_features, series_metrics, significance_tests,
                       warp_series)
from .ingest import parse_alignment, read_audio
from .labeler import (WordAnnotation, annotate_utterance,
                      annotations_to_record, write_annotations_jsonl)
from .signals import extract_energy, extract_f0


class CorpusError(ValueError):
    """Missing or inconsistent corpus files."""


@dataclass(frozen=True)
class CorpusEntry:
    """One utterance's files."""

    utterance_id: str
    audio_path: Path
    alignment_path: Path
    text: str | None = None


@dataclass(frozen=True)
class CorpusIndex:
    """Ordered mapping of utterance id to its files."""

    entries: tuple[CorpusEntry, ...]
    root: Path

    def __post_init__(self) -> None:
        if not self.entries:
            raise CorpusError(f"no utterances found under {self.root}")
        seen: set[str] = set()
        for e in self.entries:
            if e.utterance_id in seen:
                raise CorpusError(f"duplicate utterance id {e.utterance_id!r}")
            seen.add(e.utterance_id)
            for p in (e.audio_path, e.alignment_path):
                if not p.exists():
                    raise CorpusError(f"{e.utterance_id}: missing file {p}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [e.utterance_id for e in self.entries]

    def get(self, utterance_id: str) -> CorpusEntry:
        for e in self.entries:
            if e.utterance_id == utterance_id:
                return e
        raise CorpusError(f"unknown utterance id {utterance_id!r}")

    @classmethod
    def from_directory(cls, root: str | Path) -> "CorpusIndex":
        """Index wavs/ against align/, utterances sorted by id."""
        root = Path(root)
        wav_dir = root / "wavs"
        align_dir = root / "align"
        if not wav_dir.is_dir():
            raise CorpusError(f"no wavs/ directory under {root}")
        if not align_dir.is_dir():
            raise CorpusError(f"no align/ directory under {root}")
        texts: dict[str, str] = {}
        metadata = root / "metadata.csv"
        if metadata.exists():
            from .augment import read_transcripts
            texts = read_transcripts(metadata)
        entries = []
        for wav in sorted(wav_dir.glob("*.wav")):
            utt_id = wav.stem
            alignment = None
            for candidate in (f"{utt_id}.TextGrid", f"{utt_id}.textgrid",
                              f"{utt_id}.words.tsv"):
                if (align_dir / candidate).exists():
                    alignment = align_dir / candidate
                    break
            if alignment is None:
                raise CorpusError(f"{utt_id}: no alignment in {align_dir}")
            entries.append(CorpusEntry(utterance_id=utt_id, audio_path=wav,
                                       alignment_path=alignment,
                                       text=texts.get(utt_id)))
        return cls(entries=tuple(entries), root=root)

    @classmethod
    def from_manifest(cls, path: str | Path) -> "CorpusIndex":
        """Index from JSONL rows {"id", "audio", "alignment", "text"?}.

        Relative paths resolve against the manifest's directory.
        """
        path = Path(path)
        base = path.parent
        entries = []
        for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                entries.append(CorpusEntry(
                    utterance_id=row["id"],
                    audio_path=base / row["audio"],
                    alignment_path=base / row["alignment"],
                    text=row.get("text")))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path.name}:{ln}: bad manifest row: {exc}") from exc
        return cls(entries=tuple(entries), root=base)


# ---------------------------------------------------------------------------
# batch annotation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnotateSummary:
    """Outcome of a batch run: counts per class and per-utterance failures."""

    n_done: int
    n_failed: int
    prominence_counts: tuple[int, int, int]
    boundary_counts: tuple[int, int, int]
    failures: tuple[tuple[str, str], ...]
    config_hash: str

    def to_dict(self) -> dict:
        return {"n_done": self.n_done, "n_failed": self.n_failed,
                "prominence_counts": list(self.prominence_counts),
                "boundary_counts": list(self.boundary_counts),
                "failures": [{"id": i, "error": e} for i, e in self.failures],
                "config_hash": self.config_hash}


def _annotate_entry(args: tuple[CorpusEntry, Config, str]) -> tuple[str, dict | None, str | None]:
    entry, config, cfg_hash = args
    try:
        audio = read_audio(entry.audio_path)
        alignment = parse_alignment(entry.alignment_path)
        annotations = annotate_utterance(audio, alignment, config)
        return entry.utterance_id, annotations_to_record(
            entry.utterance_id, annotations, cfg_hash), None
    except Exception as exc:  # per-utterance isolation: one bad file
        return entry.utterance_id, None, f"{type(exc).__name__}: {exc}"


def batch_annotate(index: CorpusIndex, config: Config | None = None,
                   out_path: str | Path | None = None,
                   parallelism: int = 1) -> tuple[list[dict], AnnotateSummary]:
    """Annotate every utterance; failures are collected, not fatal.

    Records come back in index order regardless of parallelism, so the
    JSONL written for the same corpus and config is byte-identical whether
    run with 1 worker or 8.
    """
    if parallelism < 1:
        raise CorpusError("parallelism must be >= 1")
    cfg = config or Config()
    cfg_hash = config_hash(cfg)
    tasks = [(entry, cfg, cfg_hash) for entry in index]
    if parallelism == 1:
        results = [_annotate_entry(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_annotate_entry, tasks))

    records: list[dict] = []
    failures: list[tuple[str, str]] = []
    p_counts = [0, 0, 0]
    b_counts = [0, 0, 0]
    for utt_id, record, error in results:
        if record is None:
            failures.append((utt_id, error or "unknown error"))
            continue
        records.append(record)
        for w in record["words"]:
            p_counts[w["p"]] += 1
            b_counts[w["b"]] += 1
    summary = AnnotateSummary(
        n_done=len(records), n_failed=len(failures),
        prominence_counts=tuple(p_counts), boundary_counts=tuple(b_counts),
        failures=tuple(failures), config_hash=cfg_hash)
    if out_path is not None:
        write_annotations_jsonl(out_path, records)
    return records, summary


# ---------------------------------------------------------------------------
# batch evaluation
# ---------------------------------------------------------------------------

def _eval_series(entry_ref: CorpusEntry, entry_syn: CorpusEntry,
                 config: Config) -> dict:
    ref_audio = read_audio(entry_ref.audio_path)
    syn_audio = read_audio(entry_syn.audio_path)
    ref_mel = mel_features(ref_audio)
    syn_mel = mel_features(syn_audio)
    path, cost = dtw_align(ref_mel, syn_mel)

    def _tracks(audio):
        track = extract_f0(audio, f0_min=config.f0_min, f0_max=config.f0_max,
                           voicing_threshold=config.voicing_threshold,
                           frame_period=0.010)
        energy = extract_energy(audio, frame_period=0.010,
                                band=config.energy_band)
        return track, energy

    ref_track, ref_energy = _tracks(ref_audio)
    syn_track, syn_energy = _tracks(syn_audio)

    # Frame-rate tracks are cut to the mel frame count they were warped on.
    n_ref, n_syn = ref_mel.n_frames, syn_mel.n_frames
    ref_st = 12.0 * np.log2(np.maximum(ref_track.f0_hz[:n_ref], 1.0) / 100.0)
    syn_st = 12.0 * np.log2(np.maximum(syn_track.f0_hz[:n_syn], 1.0) / 100.0)
    ref_voiced = ref_track.voiced[:n_ref]
    syn_voiced = syn_track.voiced[:n_syn]

    _, syn_st_w = warp_series(path, ref_st, syn_st)
    _, syn_voiced_w = warp_series(path, ref_voiced, syn_voiced)
    _, syn_en_w = warp_series(path, ref_energy.values[:n_ref],
                              syn_energy.values[:n_syn])
    mask = ref_voiced & syn_voiced_w

    f0_metrics = series_metrics(ref_st, syn_st_w, mask)
    energy_metrics = series_metrics(ref_energy.values[:n_ref], syn_en_w, mask)

    ref_alignment = parse_alignment(entry_ref.alignment_path)
    syn_alignment = parse_alignment(entry_syn.alignment_path)
    durations = duration_metrics(ref_alignment, syn_alignment)

    return {"dtw_cost": cost,
            "f0": f0_metrics.to_dict(),
            "energy": energy_metrics.to_dict(),
            "phone_duration": durations["phone"].to_dict(),
            "word_duration": durations["word"].to_dict()}


_SERIES_KEYS = ("f0", "energy", "phone_duration", "word_duration")


def batch_evaluate(ref_index: CorpusIndex,
                   syn_indices: dict[str, CorpusIndex],
                   config: Config | None = None,
                   oracle_labels: dict[str, list[WordAnnotation]] | None = None,
                   predicted_labels: dict[str, dict[str, list[WordAnnotation]]] | None = None,
                   ) -> dict:
    """Score one or more synthesized corpora against a reference corpus.

    Per shared utterance and system: DTW cost over log-mel features, f0 and
    energy RMSE/correlation on the warped voiced-both frames, and duration
    metrics from the alignments. With two or more systems, per-metric score
    distributions get an ANOVA plus Bonferroni-corrected pairwise t-tests.
    Label scoring runs when oracle and per-system predicted labels are given.
    """
    if not syn_indices:
        raise CorpusError("need at least one synthesized corpus")
    cfg = config or Config()
    ref_ids = ref_index.ids()
    systems: dict[str, dict] = {}
    for name, syn_index in syn_indices.items():
        syn_ids = set(syn_index.ids())
        shared = [u for u in ref_ids if u in syn_ids]
        if not shared:
            raise CorpusError(f"system {name!r} shares no utterance ids "
                              f"with the reference")
        per_utt: dict[str, dict] = {}
        failures: list[tuple[str, str]] = []
        for utt_id in shared:
            try:
                per_utt[utt_id] = _eval_series(ref_index.get(utt_id),
                                               syn_index.get(utt_id), cfg)
            except Exception as exc:
                failures.append((utt_id, f"{type(exc).__name__}: {exc}"))
        if not per_utt:
            raise CorpusError(f"system {name!r}: every utterance failed")
        aggregates = {}
        for key in _SERIES_KEYS:
            rmses = [m[key]["rmse"] for m in per_utt.values()]
            corrs = [m[key]["correlation"] for m in per_utt.values()
                     if m[key]["correlation"] is not None]
            aggregates[key] = {
                "mean_rmse": float(np.mean(rmses)),
                "mean_correlation": float(np.mean(corrs)) if corrs else None,
            }
        aggregates["mean_dtw_cost"] = float(
            np.mean([m["dtw_cost"] for m in per_utt.values()]))
        systems[name] = {
            "utterances": per_utt, "aggregates": aggregates,
            "failures": [{"id": i, "error": e} for i, e in failures],
        }

    report: dict = {"config_hash": config_hash(cfg), "systems": systems}

    if len(systems) >= 2:
        significance: dict[str, dict] = {}
        for key in _SERIES_KEYS:
            groups = {
                name: [m[key]["rmse"] for m in sys["utterances"].values()]
                for name, sys in systems.items()
            }
            groups = {n: v for n, v in groups.items() if len(v) >= 2}
            if len(groups) >= 2:
                significance[f"{key}_rmse"] = significance_tests(groups).to_dict()
        report["significance"] = significance

    if oracle_labels and predicted_labels:
        labels: dict[str, dict] = {}
        for name, predicted in predicted_labels.items():
            labels[name] = label_report(oracle_labels, predicted).to_dict()
        report["labels"] = labels
    return report
