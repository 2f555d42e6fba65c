"""TTS input augmentation with prosody class tokens.

Each word renders as ``<pK> phones... [punct] <bK>`` where K is the word's
prominence / boundary class; the final word carries a boundary token too.
``parse_augmented`` inverts ``augment_transcript`` exactly on well-formed
strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import Lexicon
from .labeler import WordAnnotation

PUNCTUATION = (",", ".", "!", "?")

_PROSODY_TOKEN_RE = re.compile(r"^<([pb])([0-2])>$")
_WORD_RE = re.compile(r"[A-Za-z](?:[A-Za-z'-]*[A-Za-z'])?")
_PHONE_RE = re.compile(r"^[a-zA-Z]+[0-9]?$")


class AugmentError(ValueError):
    """Transcript/annotation mismatch or malformed augmented string."""


@dataclass(frozen=True)
class TranscriptToken:
    """Either a word or one of the kept punctuation marks."""

    kind: str  # "word" | "punct"
    text: str


@dataclass(frozen=True)
class Transcript:
    """Tokenized text of one utterance."""

    utterance_id: str
    tokens: tuple[TranscriptToken, ...]

    def words(self) -> list[str]:
        return [t.text for t in self.tokens if t.kind == "word"]


def tokenize_text(text: str, utterance_id: str = "") -> Transcript:
    """Split raw text into word and punctuation tokens.

    Words keep internal apostrophes and hyphens; of the punctuation only
    , . ! ? survive, each attached as its own token; everything else is
    dropped. Consecutive punctuation collapses to the first mark.
    """
    tokens: list[TranscriptToken] = []
    pos = 0
    for match in _WORD_RE.finditer(text):
        for ch in text[pos:match.start()]:
            _maybe_punct(tokens, ch)
        tokens.append(TranscriptToken(kind="word", text=match.group()))
        pos = match.end()
    for ch in text[pos:]:
        _maybe_punct(tokens, ch)
    return Transcript(utterance_id=utterance_id, tokens=tuple(tokens))


def _maybe_punct(tokens: list[TranscriptToken], ch: str) -> None:
    if ch in PUNCTUATION:
        if tokens and tokens[-1].kind == "punct":
            return
        tokens.append(TranscriptToken(kind="punct", text=ch))


def phonemize(word: str, lexicon: Lexicon,
              oov_policy: str = "graphemes") -> tuple[str, ...]:
    """Primary pronunciation of the word, lowercase phones.

    OOV handling: "graphemes" falls back to the word's letters, "error"
    raises.
    """
    pron = lexicon.lookup(word)
    if pron is not None:
        return pron
    if oov_policy == "graphemes":
        graphemes = tuple(c for c in word.lower() if c.isalpha())
        if not graphemes:
            raise AugmentError(f"word {word!r} has no letters to spell out")
        return graphemes
    if oov_policy == "error":
        raise AugmentError(f"out-of-lexicon word: {word!r}")
    raise AugmentError(f"unknown oov_policy: {oov_policy!r}")


def augment_transcript(transcript: Transcript,
                       annotations: Sequence[WordAnnotation],
                       lexicon: Lexicon,
                       oov_policy: str = "graphemes") -> str:
    """Render the transcript with prosody tokens, single-space separated.

    The transcript's word sequence must match the annotations' words
    (case-insensitive). Punctuation following a word is emitted between the
    word's phones and its boundary token.
    """
    t_words = transcript.words()
    a_words = [a.word for a in annotations]
    if len(t_words) != len(a_words) or any(
            tw.casefold() != aw.casefold() for tw, aw in zip(t_words, a_words)):
        bad = next((i for i, (tw, aw) in enumerate(zip(t_words, a_words))
                    if tw.casefold() != aw.casefold()),
                   min(len(t_words), len(a_words)))
        raise AugmentError(
            f"word sequence mismatch at index {bad}: transcript has "
            f"{t_words[bad] if bad < len(t_words) else '<end>'!r}, "
            f"annotations have "
            f"{a_words[bad] if bad < len(a_words) else '<end>'!r}")

    parts: list[str] = []
    wi = 0
    tokens = transcript.tokens
    for ti, token in enumerate(tokens):
        if token.kind != "word":
            continue
        ann = annotations[wi]
        parts.append(f"<p{ann.p_class}>")
        parts.extend(phonemize(token.text, lexicon, oov_policy))
        if ti + 1 < len(tokens) and tokens[ti + 1].kind == "punct":
            parts.append(tokens[ti + 1].text)
        parts.append(f"<b{ann.b_class}>")
        wi += 1
    return " ".join(parts)


@dataclass(frozen=True)
class ParsedWord:
    """One word recovered from an augmented string."""

    phones: tuple[str, ...]
    punctuation: str | None
    p_class: int
    b_class: int


def parse_augmented(text: str) -> list[ParsedWord]:
    """Invert augment_transcript.

    Errors on phone material outside a <pK>..<bK> span, a word missing its
    boundary token, and tokens that are neither phones, punctuation, nor
    prosody tokens.
    """
    words: list[ParsedWord] = []
    p_class: int | None = None
    phones: list[str] = []
    punct: str | None = None
    for token in text.split():
        m = _PROSODY_TOKEN_RE.match(token)
        if m:
            kind, klass = m.group(1), int(m.group(2))
            if kind == "p":
                if p_class is not None:
                    raise AugmentError(
                        f"missing <bK> before {token!r}")
                p_class = klass
                phones, punct = [], None
            else:
                if p_class is None:
                    raise AugmentError(
                        f"boundary token {token!r} without a preceding <pK>")
                words.append(ParsedWord(phones=tuple(phones),
                                        punctuation=punct,
                                        p_class=p_class, b_class=klass))
                p_class = None
        elif token in PUNCTUATION:
            if p_class is None:
                raise AugmentError(
                    f"punctuation {token!r} before any prominence token")
            if punct is not None:
                raise AugmentError(f"second punctuation mark {token!r} "
                                   f"inside one word")
            punct = token
        elif _PHONE_RE.match(token):
            if p_class is None:
                raise AugmentError(
                    f"phone {token!r} before any prominence token")
            if punct is not None:
                raise AugmentError(
                    f"phone {token!r} after punctuation; expected <bK>")
            phones.append(token)
        else:
            raise AugmentError(f"unknown token: {token!r}")
    if p_class is not None:
        raise AugmentError("missing <bK> at end of input")
    return words


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def read_transcripts(path: str | Path) -> dict[str, str]:
    """Read `id|text` (last pipe field wins) or `id<TAB>text` lines."""
    path = Path(path)
    out: dict[str, str] = {}
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        if "|" in line:
            fields = line.split("|")
            utt_id, text = fields[0], fields[-1]
        elif "\t" in line:
            utt_id, text = line.split("\t", 1)
        else:
            raise AugmentError(f"{path.name}:{ln}: expected | or tab delimiter")
        utt_id = utt_id.strip()
        if not utt_id:
            raise AugmentError(f"{path.name}:{ln}: empty utterance id")
        if utt_id in out:
            raise AugmentError(f"{path.name}:{ln}: duplicate id {utt_id!r}")
        out[utt_id] = text.strip()
    return out


def write_augmented(path: str | Path,
                    items: Iterable[tuple[str, str]]) -> None:
    """Write `id<TAB>augmented` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for utt_id, line in items:
            fh.write(f"{utt_id}\t{line}\n")


def apply_label_overrides(annotations: Sequence[WordAnnotation],
                          labels: Sequence[tuple[int, int]]) -> list[WordAnnotation]:
    """Replace (p_class, b_class) per word, e.g. to hear an edited rendition.

    The override list must cover exactly the annotated words.
    """
    if len(labels) != len(annotations):
        raise AugmentError(
            f"override has {len(labels)} label pairs for "
            f"{len(annotations)} words")
    out = []
    for ann, (p, b) in zip(annotations, labels):
        if not (0 <= p <= 2 and 0 <= b <= 2):
            raise AugmentError(f"override classes must be 0..2, got ({p}, {b})")
        out.append(WordAnnotation(word=ann.word, start=ann.start, end=ann.end,
                                  prominence=ann.prominence,
                                  boundary=ann.boundary,
                                  p_class=p, b_class=b))
    return out
