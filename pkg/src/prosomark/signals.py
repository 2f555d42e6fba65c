"""Frame-level prosodic signal extraction and combination.

All signals share one frame grid: frame i is centered at ``i * frame_period``
seconds, and a buffer of n samples yields ``1 + (n - 1) // hop`` frames, so
pitch, energy, and duration tracks for one utterance always align. Analysis
windows are centered on the frame instant with reflective padding at the
edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import butter, sosfiltfilt

from .ingest import AudioBuffer, Alignment

F0_WINDOW = 0.040
ENERGY_WINDOW = 0.030
SEMITONE_REF_HZ = 100.0
# Guard against log(0) in dB conversion; -200 dB floor for digital silence.
_ENERGY_FLOOR = 1e-10
# Population std below this is treated as constant input.
_STD_EPS = 1e-12
_MEDIAN_LEN = 5


class SignalError(ValueError):
    """Signal extraction preconditions violated."""


@dataclass(frozen=True)
class ProsodicSignal:
    """A frame-rate signal with its sampling metadata.

    Parameters
    ----------
    values : np.ndarray
        One value per frame, finite.
    frame_period : float
        Seconds between frames.
    kind : str
        One of "f0_semitones", "energy_db", "duration_seconds", "combined".
    """

    values: np.ndarray
    frame_period: float = 0.005
    kind: str = "combined"

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.size == 0:
            raise SignalError("signal must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.values)):
            raise SignalError("signal contains non-finite values")
        if self.frame_period <= 0:
            raise SignalError("frame_period must be positive")
        self.values.flags.writeable = False

    def __len__(self) -> int:
        return len(self.values)

    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.frame_period

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "ProsodicSignal":
        return ProsodicSignal(values=np.asarray(values, dtype=np.float64),
                              frame_period=self.frame_period,
                              kind=kind or self.kind)


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame f0 estimates with a voicing mask; f0 is 0 where unvoiced."""

    f0_hz: np.ndarray
    voiced: np.ndarray
    frame_period: float = 0.005

    def __post_init__(self) -> None:
        if self.f0_hz.shape != self.voiced.shape:
            raise SignalError("f0 and voicing arrays must share a shape")
        self.f0_hz.flags.writeable = False
        self.voiced.flags.writeable = False

    def __len__(self) -> int:
        return len(self.f0_hz)


@dataclass(frozen=True)
class SignalWeights:
    """Relative weights of the three streams in the prominence sum."""

    f0: float = 1.0
    energy: float = 0.5
    duration: float = 1.0

    def __post_init__(self) -> None:
        w = (self.f0, self.energy, self.duration)
        if any(x < 0 for x in w) or not any(x > 0 for x in w):
            raise SignalError("weights must be non-negative with at least one positive")


def frame_count(n_samples: int, hop: int) -> int:
    """Number of centered frames for a buffer of n_samples."""
    if n_samples <= 0 or hop <= 0:
        raise SignalError("need positive sample count and hop")
    return 1 + (n_samples - 1) // hop


def _centered_frames(samples: np.ndarray, win: int, hop: int) -> np.ndarray:
    """[n_frames, win] view of reflect-padded audio, frame i at i*hop."""
    n = len(samples)
    if n < win:
        raise SignalError(
            f"audio ({n} samples) shorter than one analysis window ({win})")
    left = win // 2
    right = win - left
    padded = np.pad(samples, (left, right), mode="reflect")
    frames = sliding_window_view(padded, win)[::hop]
    return frames[:frame_count(n, hop)]


def znorm(signal: ProsodicSignal) -> ProsodicSignal:
    """Zero-mean, unit-variance copy; constant input maps to all zeros."""
    std = float(np.std(signal.values))
    if std <= _STD_EPS:
        return signal.with_values(np.zeros(len(signal)))
    return signal.with_values((signal.values - np.mean(signal.values)) / std)


def _minmax_rescale(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= _STD_EPS:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


# ---------------------------------------------------------------------------
# pitch
# ---------------------------------------------------------------------------

def extract_f0(audio: AudioBuffer, f0_min: float = 60.0, f0_max: float = 400.0,
               voicing_threshold: float = 0.45,
               frame_period: float = 0.005) -> PitchTrack:
    """Track f0 by normalized autocorrelation over 40 ms windows.

    A frame is voiced when its normalized autocorrelation peak within the
    candidate lag range reaches the threshold; the peak lag is refined by
    parabolic interpolation and the resulting f0 clamped to [f0_min, f0_max].
    Each voiced run is median-smoothed (length 5, clipped at run edges).

    Returns
    -------
    PitchTrack
        f0 in Hz (0 where unvoiced) and the voicing mask.
    """
    if not 0 < f0_min < f0_max:
        raise SignalError("need 0 < f0_min < f0_max")
    sr = audio.sample_rate
    if f0_max > sr / 2:
        raise SignalError("f0_max above Nyquist")
    win = round(F0_WINDOW * sr)
    hop = max(1, round(frame_period * sr))
    frames = _centered_frames(audio.samples, win, hop)
    frames = frames - frames.mean(axis=1, keepdims=True)

    # Zero-padded FFT autocorrelation, normalized by lag-0 power.
    nfft = 1 << (2 * win - 1).bit_length()
    spectrum = np.fft.rfft(frames, n=nfft, axis=1)
    acf = np.fft.irfft(spectrum * np.conj(spectrum), n=nfft, axis=1)[:, :win]
    power = acf[:, 0].copy()
    silent = power < 1e-12
    power[silent] = 1.0
    nacf = acf / power[:, None]

    lag_min = max(2, int(sr / f0_max))
    lag_max = min(win - 2, math.ceil(sr / f0_min))
    if lag_min >= lag_max:
        raise SignalError("f0 range too narrow for the analysis window")

    n_frames = len(frames)
    f0 = np.zeros(n_frames)
    best = lag_min + np.argmax(nacf[:, lag_min:lag_max + 1], axis=1)
    peak = nacf[np.arange(n_frames), best]
    voiced = (peak >= voicing_threshold) & ~silent
    for i in np.flatnonzero(voiced):
        lag = int(best[i])
        y0, y1, y2 = nacf[i, lag - 1], nacf[i, lag], nacf[i, lag + 1]
        denom = y0 - 2.0 * y1 + y2
        delta = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-12 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        f0[i] = min(max(sr / (lag + delta), f0_min), f0_max)

    _median_smooth_runs(f0, voiced)
    f0[~voiced] = 0.0
    return PitchTrack(f0_hz=f0, voiced=voiced, frame_period=frame_period)


def _median_smooth_runs(f0: np.ndarray, voiced: np.ndarray) -> None:
    """In-place median filter applied independently inside each voiced run."""
    half = _MEDIAN_LEN // 2
    i = 0
    n = len(f0)
    while i < n:
        if not voiced[i]:
            i += 1
            continue
        j = i
        while j < n and voiced[j]:
            j += 1
        run = f0[i:j].copy()
        for k in range(len(run)):
            lo = max(0, k - half)
            hi = min(len(run), k + half + 1)
            f0[i + k] = np.median(run[lo:hi])
        i = j


def pitch_to_semitones(track: PitchTrack,
                       ref_hz: float = SEMITONE_REF_HZ) -> ProsodicSignal:
    """Voiced f0 in semitones re ref_hz, unvoiced gaps linearly interpolated.

    Edges beyond the first/last voiced frame extend constantly. A track with
    no voiced frames yields all zeros.
    """
    n = len(track)
    idx = np.flatnonzero(track.voiced)
    if idx.size == 0:
        values = np.zeros(n)
    else:
        st = 12.0 * np.log2(track.f0_hz[idx] / ref_hz)
        values = np.interp(np.arange(n), idx, st)
    return ProsodicSignal(values=values, frame_period=track.frame_period,
                          kind="f0_semitones")


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def extract_energy(audio: AudioBuffer, frame_period: float = 0.005,
                   band: tuple[float, float] | None = None) -> ProsodicSignal:
    """RMS energy in dB over 30 ms windows, optionally band-passed first.

    dB is ``20 * log10(rms + 1e-10)``, so digital silence floors at -200 dB.
    """
    sr = audio.sample_rate
    samples = audio.samples
    if band is not None:
        lo, hi = band
        if not 0 < lo < hi < sr / 2:
            raise SignalError(f"energy band {band} invalid for sr={sr}")
        sos = butter(4, (lo, hi), btype="bandpass", fs=sr, output="sos")
        samples = sosfiltfilt(sos, samples)
    win = round(ENERGY_WINDOW * sr)
    hop = max(1, round(frame_period * sr))
    frames = _centered_frames(samples, win, hop)
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    values = 20.0 * np.log10(rms + _ENERGY_FLOOR)
    return ProsodicSignal(values=values, frame_period=frame_period,
                          kind="energy_db")


# ---------------------------------------------------------------------------
# duration
# ---------------------------------------------------------------------------

def duration_signal(alignment: Alignment, n_frames: int,
                    frame_period: float = 0.005) -> ProsodicSignal:
    """Continuous duration signal from word lengths.

    Each word anchors its duration (silences anchor 0) at the frame nearest
    its midpoint; values between anchors interpolate linearly and extend
    constantly beyond the first and last anchor.
    """
    if n_frames <= 0:
        raise SignalError("n_frames must be positive")
    if not alignment.words:
        raise SignalError("alignment has no words")
    anchors: dict[int, list[float]] = {}
    for word in alignment.words:
        frame = round(word.midpoint / frame_period)
        if frame >= n_frames:
            raise SignalError(
                f"word {word.label!r} midpoint at frame {frame} outside "
                f"signal of {n_frames} frames")
        value = 0.0 if word.is_silence else word.duration
        anchors.setdefault(frame, []).append(value)
    frames = sorted(anchors)
    # Colliding anchors (very short words) average.
    values = [sum(anchors[f]) / len(anchors[f]) for f in frames]
    out = np.interp(np.arange(n_frames), frames, values)
    return ProsodicSignal(values=out, frame_period=frame_period,
                          kind="duration_seconds")


# ---------------------------------------------------------------------------
# combination
# ---------------------------------------------------------------------------

def _check_compatible(*signals: ProsodicSignal) -> None:
    first = signals[0]
    for s in signals[1:]:
        if len(s) != len(first):
            raise SignalError(
                f"signal length mismatch: {len(first)} vs {len(s)}")
        if abs(s.frame_period - first.frame_period) > 1e-12:
            raise SignalError("signal frame_period mismatch")


def combine_prominence(f0: ProsodicSignal, energy: ProsodicSignal,
                       duration: ProsodicSignal,
                       weights: SignalWeights = SignalWeights()) -> ProsodicSignal:
    """Weighted sum of the three (z-normalized) streams, re-normalized."""
    _check_compatible(f0, energy, duration)
    combined = (weights.f0 * f0.values + weights.energy * energy.values
                + weights.duration * duration.values)
    return znorm(ProsodicSignal(values=combined,
                                frame_period=f0.frame_period, kind="combined"))


def combine_boundary(f0: ProsodicSignal, energy: ProsodicSignal,
                     duration: ProsodicSignal,
                     normalize: bool = True) -> ProsodicSignal:
    """Product of the three streams min-max rescaled to [0, 1].

    The product dips wherever any stream dips, which is what marks a
    boundary. A constant stream rescales to zeros. With normalize=False the
    raw product is returned instead of its z-normalization.
    """
    _check_compatible(f0, energy, duration)
    product = (_minmax_rescale(f0.values) * _minmax_rescale(energy.values)
               * _minmax_rescale(duration.values))
    signal = ProsodicSignal(values=product, frame_period=f0.frame_period,
                            kind="combined")
    return znorm(signal) if normalize else signal
