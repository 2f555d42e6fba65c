"""Readers for audio files, forced alignments, and pronunciation lexicons.

Audio is returned as mono float64 in [-1, 1] regardless of storage format.
Alignments carry two interval tiers (words, phones) linked by containment
of phone midpoints in word intervals. All returned structures are frozen.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

SILENCE_LABEL = "sil"
# Labels that alignment tools emit for non-speech stretches.
_SILENCE_ALIASES = frozenset({"", "sil", "sp", "spn"})

# Interval boundaries arrive through %.4f text; anything tighter than a
# tenth of that resolution is treated as exact.
_TIME_EPS = 1e-6


class AudioError(ValueError):
    """Unreadable or unsupported audio input."""


class AlignmentError(ValueError):
    """Malformed alignment file or inconsistent tiers."""


class LexiconError(ValueError):
    """Malformed pronunciation lexicon."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


# ---------------------------------------------------------------------------
# audio
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio, float64 samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise AudioError("audio must be a non-empty 1-D sample array")
        if self.sample_rate < 8000:
            raise AudioError(f"sample rate {self.sample_rate} below 8000 Hz")
        _freeze(self.samples)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def read_audio(path: str | Path) -> AudioBuffer:
    """Read a WAV file into a normalized mono buffer.

    Accepts 16-bit and 24-bit integer PCM and 32-bit float. Multi-channel
    input is downmixed by averaging. Compressed encodings raise AudioError.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"audio file not found: {path}")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise AudioError(f"unsupported encoding in {path.name}: {exc}") from exc
    if data.size == 0:
        raise AudioError(f"zero-length audio: {path.name}")

    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        # 24-bit PCM arrives as int32 shifted into the high bytes, so the
        # same divisor normalizes both 24- and 32-bit integer data.
        samples = data / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise AudioError(f"unsupported sample format {data.dtype} in {path.name}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    samples = np.clip(np.ascontiguousarray(samples, dtype=np.float64), -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate=int(rate))


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int,
              bit_depth: int = 16) -> None:
    """Write mono float samples to WAV at 16-bit, 24-bit, or float32.

    Values outside [-1, 1] are clipped. Integer depths quantize by rounding,
    so a read-back differs from the input by at most one quantization step.
    """
    samples = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    path = Path(path)
    if bit_depth == 16:
        quant = np.clip(np.round(samples * 32768.0), -32768, 32767).astype(np.int16)
        wavfile.write(path, sample_rate, quant)
    elif bit_depth == 32:
        wavfile.write(path, sample_rate, samples.astype(np.float32))
    elif bit_depth == 24:
        quant = np.clip(np.round(samples * 8388608.0), -8388608, 8388607).astype(np.int32)
        raw = quant.astype("<i4").tobytes()
        # Strip the high byte of each little-endian int32 to get 3-byte frames.
        frames = b"".join(raw[i:i + 3] for i in range(0, len(raw), 4))
        _write_riff_pcm(path, frames, sample_rate, bits=24)
    else:
        raise AudioError(f"unsupported bit depth: {bit_depth}")


def _write_riff_pcm(path: Path, frames: bytes, rate: int, bits: int) -> None:
    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(frames), b"WAVE",
        b"fmt ", 16, 1, 1, rate, rate * block_align, block_align, bits,
        b"data", len(frames),
    )
    path.write_bytes(header + frames)


# ---------------------------------------------------------------------------
# alignments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A labeled time span; silence stretches carry the normalized label."""

    label: str
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def is_silence(self) -> bool:
        return self.label == SILENCE_LABEL


@dataclass(frozen=True)
class Word(Interval):
    """A word interval plus the half-open span of its phones."""

    phone_span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class Alignment:
    """Word and phone tiers of one utterance, silence-normalized and linked."""

    utterance_id: str
    words: tuple[Word, ...]
    phones: tuple[Interval, ...]

    @property
    def end(self) -> float:
        """End time of the last interval on either tier."""
        last = 0.0
        if self.words:
            last = self.words[-1].end
        if self.phones:
            last = max(last, self.phones[-1].end)
        return last

    def non_silence_words(self) -> tuple[Word, ...]:
        return tuple(w for w in self.words if not w.is_silence)

    def word_phones(self, word: Word) -> tuple[Interval, ...]:
        lo, hi = word.phone_span
        return self.phones[lo:hi]


def _normalize_label(label: str) -> str:
    stripped = label.strip()
    return SILENCE_LABEL if stripped.lower() in _SILENCE_ALIASES else stripped


def _check_tier(intervals: list[Interval], tier: str) -> None:
    for i, iv in enumerate(intervals):
        if iv.start < -_TIME_EPS or iv.end <= iv.start + _TIME_EPS:
            raise AlignmentError(
                f"{tier} tier: degenerate interval at index {i} "
                f"({iv.start:.4f}..{iv.end:.4f})")
        if i and iv.start < intervals[i - 1].end - _TIME_EPS:
            raise AlignmentError(
                f"{tier} tier: overlapping intervals at index {i} "
                f"({intervals[i - 1].end:.4f} > {iv.start:.4f})")


def _link_tiers(utt_id: str, word_ivs: list[Interval],
                phone_ivs: list[Interval]) -> Alignment:
    _check_tier(word_ivs, "words")
    _check_tier(phone_ivs, "phones")
    spans: list[list[int] | None] = [None] * len(word_ivs)
    for pi, phone in enumerate(phone_ivs):
        mid = phone.midpoint
        owner = next(
            (wi for wi, w in enumerate(word_ivs)
             if w.start - _TIME_EPS <= mid < w.end + _TIME_EPS), None)
        if owner is None:
            if phone.label == SILENCE_LABEL:
                continue
            raise AlignmentError(
                f"{utt_id}: phone {phone.label!r} at {phone.start:.4f}s "
                f"not covered by any word interval")
        if word_ivs[owner].label == SILENCE_LABEL:
            continue
        span = spans[owner]
        if span is None:
            spans[owner] = [pi, pi + 1]
        elif pi == span[1]:
            span[1] = pi + 1
        else:
            raise AlignmentError(
                f"{utt_id}: phones of word {word_ivs[owner].label!r} "
                f"are not contiguous")
    words = tuple(
        Word(label=iv.label, start=iv.start, end=iv.end,
             phone_span=tuple(spans[i]) if spans[i] else (0, 0))
        for i, iv in enumerate(word_ivs))
    return Alignment(utterance_id=utt_id, words=words, phones=tuple(phone_ivs))


# TextGrid long format: interval blocks repeat xmin/xmax/text; quotes inside
# text values are doubled.
_TG_TIER_RE = re.compile(r"item\s*\[\d+\]\s*:")
_TG_FIELD_RE = re.compile(r'(\w+)\s*=\s*(?:"((?:[^"]|"")*)"|([-\d.eE+]+))')


def parse_textgrid(path: str | Path) -> Alignment:
    """Parse a Praat long-format TextGrid with 'words' and 'phones' tiers."""
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    chunks = _TG_TIER_RE.split(text)
    if len(chunks) < 2:
        raise AlignmentError(f"{path.name}: no tiers found")
    tiers: dict[str, list[Interval]] = {}
    for chunk in chunks[1:]:
        fields = _TG_FIELD_RE.findall(chunk)
        tier_class = tier_name = None
        intervals: list[Interval] = []
        cur: dict[str, float | str] = {}
        for key, sval, nval in fields:
            if key == "class" and tier_class is None:
                tier_class = sval
            elif key == "name" and tier_name is None:
                tier_name = sval
            elif key == "xmin" and tier_name is not None:
                cur = {"xmin": float(nval)}
            elif key == "xmax" and "xmin" in cur and "xmax" not in cur:
                cur["xmax"] = float(nval)
            elif key == "text" and "xmax" in cur:
                label = _normalize_label(sval.replace('""', '"'))
                intervals.append(Interval(label=label, start=float(cur["xmin"]),
                                          end=float(cur["xmax"])))
                cur = {}
        if tier_class != "IntervalTier" or tier_name is None:
            continue
        tiers[tier_name.lower()] = intervals
    if "words" not in tiers or "phones" not in tiers:
        missing = {"words", "phones"} - set(tiers)
        raise AlignmentError(
            f"{path.name}: missing tier(s): {', '.join(sorted(missing))}")
    return _link_tiers(path.stem, tiers["words"], tiers["phones"])


def _read_tsv_tier(path: Path, tier: str) -> list[Interval]:
    intervals: list[Interval] = []
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise AlignmentError(f"{path.name}:{ln}: expected 3 tab-separated "
                                 f"columns, got {len(parts)}")
        try:
            start, end = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise AlignmentError(f"{path.name}:{ln}: bad time field") from exc
        intervals.append(Interval(label=_normalize_label(parts[2]),
                                  start=start, end=end))
    if not intervals:
        raise AlignmentError(f"{path.name}: empty {tier} tier")
    return intervals


def parse_tsv_alignment(words_path: str | Path) -> Alignment:
    """Parse a `<stem>.words.tsv` / `<stem>.phones.tsv` pair.

    Each file holds `start<TAB>end<TAB>label` rows in seconds.
    """
    words_path = Path(words_path)
    name = words_path.name
    if not name.endswith(".words.tsv"):
        raise AlignmentError(f"expected a .words.tsv file, got {name}")
    stem = name[:-len(".words.tsv")]
    phones_path = words_path.with_name(stem + ".phones.tsv")
    if not phones_path.exists():
        raise FileNotFoundError(f"phones file not found: {phones_path}")
    return _link_tiers(stem,
                       _read_tsv_tier(words_path, "words"),
                       _read_tsv_tier(phones_path, "phones"))


def parse_alignment(path: str | Path) -> Alignment:
    """Dispatch on extension: .TextGrid or .words.tsv."""
    path = Path(path)
    lower = path.name.lower()
    if lower.endswith(".textgrid"):
        return parse_textgrid(path)
    if lower.endswith(".words.tsv"):
        return parse_tsv_alignment(path)
    raise AlignmentError(f"unrecognized alignment format: {path.name}")


def write_tsv_alignment(dir_path: str | Path, alignment: Alignment) -> None:
    """Write the word/phone tiers as a TSV pair with %.4f second fields."""
    dir_path = Path(dir_path)
    for tier, intervals in (("words", alignment.words),
                            ("phones", alignment.phones)):
        lines = [f"{iv.start:.4f}\t{iv.end:.4f}\t{iv.label}"
                 for iv in intervals]
        out = dir_path / f"{alignment.utterance_id}.{tier}.tsv"
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# lexicon
# ---------------------------------------------------------------------------

_ALT_RE = re.compile(r"^(.*)\((\d+)\)$")


@dataclass(frozen=True)
class Lexicon:
    """Word to pronunciation map; lookups are case-insensitive."""

    entries: dict[str, tuple[tuple[str, ...], ...]] = field(default_factory=dict)

    def lookup(self, word: str) -> tuple[str, ...] | None:
        """Primary (first listed) pronunciation, or None for OOV words."""
        prons = self.entries.get(word.upper())
        return prons[0] if prons else None

    def __contains__(self, word: str) -> bool:
        return word.upper() in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load a CMU-style lexicon.

    Lines are `WORD PH1 PH2 ...`; `WORD(2)` marks alternate pronunciations,
    kept after the primary. `;;;` lines are comments. Phones are lowercased.
    """
    path = Path(path)
    entries: dict[str, list[tuple[str, ...]]] = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith(";;;"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise LexiconError(f"{path.name}:{ln}: entry has no phones")
            word = parts[0].upper()
            m = _ALT_RE.match(word)
            if m:
                word = m.group(1)
            phones = tuple(p.lower() for p in parts[1:])
            entries.setdefault(word, []).append(phones)
    return Lexicon(entries={w: tuple(ps) for w, ps in entries.items()})
