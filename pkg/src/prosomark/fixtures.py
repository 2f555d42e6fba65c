"""Synthetic speech corpus with designed prominence and boundary structure.

Each utterance is a harmonic-source rendering of nonsense CV words where one
word is emphasized (higher pitch peak, louder, stretched), one or two are
deaccented (flat pitch, quieter, compressed), and a subset of word joints
carries a real pause. The design ground truth ships alongside the audio so
labeling quality is measurable without human annotation.

All interval boundaries land on 5 ms multiples, so TSV times are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import (Alignment, Interval, SILENCE_LABEL, _link_tiers,
                     write_tsv_alignment, write_wav)

SAMPLE_RATE = 16000
UNIT = 0.005  # timing grid in seconds; 80 samples at 16 kHz

_CONSONANTS = ("b", "d", "g", "m", "n", "t")
# Vowel grapheme -> lexicon phone.
_VOWELS = {"a": "AA", "e": "EH", "i": "IY", "o": "OW", "u": "UW"}

# Acoustic realization of the three designed roles. Emphasis must survive
# z-normalization and wavelet-band averaging with a clear margin, so the
# deltas are large for read speech but not absurd for acted emphasis.
_ROLE_F0_PEAK_ST = {"emphasized": 8.0, "neutral": 2.5, "deaccented": 1.0}
# Deaccenting shows up mostly in f0: gain and tempo stay close to neutral
# so quiet words don't dent the boundary product the way pauses do.
_ROLE_GAIN = {"emphasized": 2.0, "neutral": 1.0, "deaccented": 0.85}
_ROLE_TEMPO = {"emphasized": 1.8, "neutral": 1.0, "deaccented": 1.0}

_NOISE_FLOOR = 5e-4
_LEAD_UNITS = 30   # 150 ms silence before and after the speech
_BASE_F0_ST = 4.0  # semitones re 100 Hz at utterance start
_DECLINATION_ST = 1.0
# Phrase intonation: a sharp final fall squeezed into the last moments of
# each phrase-final word, a raised onset on each phrase-initial word, and a
# lengthened final vowel. Keeping the f0 floor localized at pause edges
# (rather than spread over phrase ends) is what makes the boundary product
# dip exactly at pauses instead of inside words.
_FINAL_FALL_ST = 4.5
_FINAL_FALL_SEC = 0.09
_ONSET_BOOST_ST = 1.5
_FINAL_LENGTHEN = 1.35
# Accent bumps keep this fraction of their peak at word edges so f0 stays
# connected inside a phrase and only pauses open deep product valleys.
_BUMP_FLOOR = 0.45


@dataclass(frozen=True)
class UtteranceDesign:
    """Ground truth for one synthesized utterance."""

    utterance_id: str
    words: tuple[str, ...]
    emphasized: tuple[int, ...]
    deaccented: tuple[int, ...]
    pause_joints: tuple[int, ...]
    text: str

    @property
    def internal_joints(self) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.words) - 1)
                     if j not in self.pause_joints)

    def to_dict(self) -> dict:
        return {"id": self.utterance_id, "words": list(self.words),
                "emphasized": list(self.emphasized),
                "deaccented": list(self.deaccented),
                "pause_joints": list(self.pause_joints),
                "text": self.text}


@dataclass
class _WordPlan:
    text: str
    role: str
    phones: list[str]        # lexicon phones with stress, e.g. B AA1 D OW0
    phone_units: list[int]   # per-phone length on the 5 ms grid
    start_unit: int = 0

    @property
    def n_units(self) -> int:
        return sum(self.phone_units)


def _make_word(rng: np.random.Generator) -> tuple[str, list[str]]:
    # Two syllables per word: single-syllable words are short enough to
    # leave notches in the duration stream that read as phantom boundaries.
    text = ""
    phones: list[str] = []
    for s in range(2):
        c = _CONSONANTS[rng.integers(len(_CONSONANTS))]
        v = list(_VOWELS)[rng.integers(len(_VOWELS))]
        text += c + v
        stress = "1" if s == 0 else "0"
        phones += [c.upper(), _VOWELS[v] + stress]
    return text, phones


def _plan_utterance(rng: np.random.Generator, utt_id: str) -> tuple[
        list[_WordPlan], UtteranceDesign, list[int]]:
    n_words = int(rng.integers(5, 9))
    n_joints = n_words - 1
    n_pauses = max(1, round(n_joints / 3))
    # Interior joints only: a pause hugging the lead or trail silence turns
    # its neighbor word into a narrow island whose edges blur together at
    # the coarser analysis scales.
    # Consecutive pause joints would leave a one-word phrase whose flanking
    # silences merge into a single basin at coarse scales, so pauses also
    # keep at least two words between them.
    pause_joints: list[int] = []
    for j in rng.permutation(np.arange(1, n_joints - 1)):
        if all(abs(int(j) - p) >= 2 for p in pause_joints):
            pause_joints.append(int(j))
        if len(pause_joints) == n_pauses:
            break
    pause_joints.sort()

    # Special roles go to words not touching a pause, so role acoustics and
    # pause acoustics never overlap in one stretch of signal.
    pause_adjacent = {j for p in pause_joints for j in (p, p + 1)}
    role_pool = [w for w in range(n_words) if w not in pause_adjacent]
    n_deacc = min(int(rng.integers(1, 3)), len(role_pool) - 1)
    roles = ["neutral"] * n_words
    special = rng.choice(role_pool, size=1 + n_deacc, replace=False)
    roles[special[0]] = "emphasized"
    for i in special[1:]:
        roles[i] = "deaccented"
    # 300-360 ms: narrower than the finest phrase-band period, so the
    # wavelet trough locks to the pause center instead of wandering across
    # a flat basin wider than its own central lobe.
    pause_units = [int(rng.integers(60, 73)) for _ in pause_joints]

    words: list[_WordPlan] = []
    for wi, role in enumerate(roles):
        text, phones = _make_word(rng)
        units = []
        for ph in phones:
            base = (int(rng.integers(12, 17)) if ph[-1].isdigit()
                    else int(rng.integers(10, 14)))
            scaled = max(6, round(base * _ROLE_TEMPO[role]))
            units.append(scaled)
        if wi in pause_joints or wi == n_words - 1:
            units[-1] = round(units[-1] * _FINAL_LENGTHEN)
        words.append(_WordPlan(text=text, role=role, phones=phones,
                               phone_units=units))

    cursor = _LEAD_UNITS
    for wi, word in enumerate(words):
        word.start_unit = cursor
        cursor += word.n_units
        if wi in pause_joints:
            cursor += pause_units[pause_joints.index(wi)]

    parts = []
    for wi, word in enumerate(words):
        sep = ", " if wi in pause_joints else " "
        parts.append(word.text + (sep if wi < n_words - 1 else "."))
    text = "".join(parts)

    design = UtteranceDesign(
        utterance_id=utt_id, words=tuple(w.text for w in words),
        emphasized=(int(special[0]),),
        deaccented=tuple(sorted(int(i) for i in special[1:])),
        pause_joints=tuple(pause_joints), text=text)
    return words, design, pause_units


def _hann_bump(n: int) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / max(n - 1, 1)))


def _synthesize(rng: np.random.Generator, words: list[_WordPlan],
                pause_joints: tuple[int, ...], total_units: int) -> np.ndarray:
    n = total_units * round(UNIT * SAMPLE_RATE)
    t = np.arange(n) / SAMPLE_RATE
    total_sec = total_units * UNIT

    st = _BASE_F0_ST - _DECLINATION_ST * t / total_sec
    fall_len = round(_FINAL_FALL_SEC * SAMPLE_RATE)
    for wi, word in enumerate(words):
        w0 = word.start_unit * 80
        w1 = w0 + word.n_units * 80
        if wi == 0 or (wi - 1) in pause_joints:
            st[w0:w1] += np.linspace(_ONSET_BOOST_ST, 0.0, w1 - w0)
        if wi in pause_joints or wi == len(words) - 1:
            k = min(fall_len, w1 - w0)
            ramp = np.linspace(0.0, 1.0, k)
            st[w1 - k:w1] -= _FINAL_FALL_ST * ramp * ramp

    gain = np.zeros(n)
    for word in words:
        w0 = word.start_unit * 80
        w1 = w0 + word.n_units * 80
        bump = _BUMP_FLOOR + (1.0 - _BUMP_FLOOR) * _hann_bump(w1 - w0)
        st[w0:w1] += _ROLE_F0_PEAK_ST[word.role] * bump
        cursor = w0
        for ph, units in zip(word.phones, word.phone_units):
            level = 1.0 if ph[-1].isdigit() else 0.55
            gain[cursor:cursor + units * 80] = level * _ROLE_GAIN[word.role]
            cursor += units * 80
    # 10 ms smoothing avoids clicks and gives energy gentle word edges.
    smooth = np.hanning(161)
    gain = np.convolve(gain, smooth / smooth.sum(), mode="same")

    hz = 100.0 * 2.0 ** (st / 12.0)
    phase = 2.0 * np.pi * np.cumsum(hz) / SAMPLE_RATE
    weights = 0.82 ** np.arange(8)
    voice = sum(w * np.sin((k + 1) * phase) for k, w in enumerate(weights))
    voice /= weights.sum()

    samples = 0.22 * gain * voice + _NOISE_FLOOR * rng.standard_normal(n)
    peak = np.abs(samples).max()
    if peak > 0.85:
        samples *= 0.85 / peak
    return samples


def _build_alignment(utt_id: str, words: list[_WordPlan],
                     total_units: int) -> Alignment:
    word_ivs: list[Interval] = []
    phone_ivs: list[Interval] = []
    cursor = 0

    def _sil(tier: list[Interval], lo: int, hi: int) -> None:
        tier.append(Interval(label=SILENCE_LABEL, start=lo * UNIT, end=hi * UNIT))

    for word in words:
        if word.start_unit > cursor:
            _sil(word_ivs, cursor, word.start_unit)
            _sil(phone_ivs, cursor, word.start_unit)
        end_unit = word.start_unit + word.n_units
        word_ivs.append(Interval(label=word.text, start=word.start_unit * UNIT,
                                 end=end_unit * UNIT))
        p_cursor = word.start_unit
        for ph, units in zip(word.phones, word.phone_units):
            label = ph.rstrip("0123456789").lower()
            phone_ivs.append(Interval(label=label, start=p_cursor * UNIT,
                                      end=(p_cursor + units) * UNIT))
            p_cursor += units
        cursor = end_unit
    if cursor < total_units:
        _sil(word_ivs, cursor, total_units)
        _sil(phone_ivs, cursor, total_units)
    return _link_tiers(utt_id, word_ivs, phone_ivs)


def generate_corpus(out_dir: str | Path, count: int = 20, seed: int = 42,
                    sample_rate: int = SAMPLE_RATE) -> list[UtteranceDesign]:
    """Write wavs/, align/, metadata.csv, lexicon.dict, and design.json.

    Deterministic in (count, seed). Returns the per-utterance designs.
    """
    if sample_rate != SAMPLE_RATE:
        raise ValueError("fixture synthesis is fixed at 16 kHz")
    if count < 1:
        raise ValueError("count must be positive")
    out_dir = Path(out_dir)
    (out_dir / "wavs").mkdir(parents=True, exist_ok=True)
    (out_dir / "align").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    designs: list[UtteranceDesign] = []
    lexicon: dict[str, list[str]] = {}
    metadata_lines: list[str] = []
    for i in range(count):
        utt_id = f"fix{i + 1:04d}"
        words, design, _pauses = _plan_utterance(rng, utt_id)
        total_units = max(w.start_unit + w.n_units for w in words) + _LEAD_UNITS
        samples = _synthesize(rng, words, design.pause_joints, total_units)
        write_wav(out_dir / "wavs" / f"{utt_id}.wav", samples, SAMPLE_RATE)
        alignment = _build_alignment(utt_id, words, total_units)
        write_tsv_alignment(out_dir / "align", alignment)
        for word in words:
            lexicon.setdefault(word.text.upper(), word.phones)
        metadata_lines.append(f"{utt_id}|{design.text}")
        designs.append(design)

    (out_dir / "metadata.csv").write_text("\n".join(metadata_lines) + "\n",
                                          encoding="utf-8")
    lex_lines = [f"{w} {' '.join(ph)}" for w, ph in sorted(lexicon.items())]
    (out_dir / "lexicon.dict").write_text("\n".join(lex_lines) + "\n",
                                          encoding="utf-8")
    (out_dir / "design.json").write_text(
        json.dumps({"seed": seed, "count": count, "sample_rate": SAMPLE_RATE,
                    "utterances": [d.to_dict() for d in designs]},
                   indent=2) + "\n", encoding="utf-8")
    return designs


def load_design(path: str | Path) -> list[UtteranceDesign]:
    """Read design.json back into UtteranceDesign records."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        UtteranceDesign(utterance_id=u["id"], words=tuple(u["words"]),
                        emphasized=tuple(u["emphasized"]),
                        deaccented=tuple(u["deaccented"]),
                        pause_joints=tuple(u["pause_joints"]),
                        text=u["text"])
        for u in data["utterances"]
    ]
