"""Continuous wavelet transform and ridge/valley line tracking.

The transform correlates a frame-rate signal with L2-normalized Mexican-hat
kernels over a geometric bank of pseudo-periods. With L2 normalization a
cosine of period P responds maximally at scale ``a = P * sqrt(5/2) / (2*pi)``
seconds, so each bank entry is labeled by the period it localizes, and a
peak lands within half an octave of the true period by construction.

Ridge lines (local maxima linked across scales) mark prominences; valley
lines (local minima) mark boundaries. Lines are tracked fine to coarse with
a per-scale linking window proportional to the scale's period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .signals import ProsodicSignal

# Peak-response scale (seconds) for a unit-period cosine under the
# L2-normalized Mexican hat: argmax_a sqrt(a) * psihat(a * 2*pi).
CENTER_FREQUENCY = math.sqrt(2.5) / (2.0 * math.pi)

# Kernel support in units of the scale; the hat is below 1e-4 beyond |t|=5.
_KERNEL_HALF_WIDTH = 5.0


class WaveletError(ValueError):
    """Invalid scale bank, band, or transform input."""


def mexican_hat(t: np.ndarray) -> np.ndarray:
    """Mexican hat (Ricker) wavelet, unit-L2-norm in continuous time."""
    t = np.asarray(t, dtype=np.float64)
    amplitude = 2.0 / (math.sqrt(3.0) * math.pi ** 0.25)
    return amplitude * (1.0 - t * t) * np.exp(-0.5 * t * t)


@dataclass(frozen=True)
class ScaleBank:
    """Geometric grid of pseudo-periods in seconds, fine to coarse."""

    periods: np.ndarray

    def __post_init__(self) -> None:
        p = self.periods
        if p.ndim != 1 or p.size == 0:
            raise WaveletError("periods must be a non-empty 1-D array")
        if np.any(p <= 0) or np.any(np.diff(p) <= 0):
            raise WaveletError("periods must be positive and strictly increasing")
        if p.size > 2:
            ratios = p[1:] / p[:-1]
            if not np.allclose(ratios, ratios[0], rtol=1e-6):
                raise WaveletError("periods must be geometrically spaced")
        p.flags.writeable = False

    @classmethod
    def geometric(cls, period_min: float = 0.08, period_max: float = 5.12,
                  scales_per_octave: int = 2) -> "ScaleBank":
        """Bank covering [period_min, period_max] at 2^(1/spo) spacing.

        The last period never exceeds period_max (half-step tolerance for
        float rounding).
        """
        if not 0 < period_min < period_max:
            raise WaveletError("need 0 < period_min < period_max")
        if scales_per_octave < 1:
            raise WaveletError("scales_per_octave must be >= 1")
        n_octaves = math.log2(period_max / period_min)
        n = int(round(n_octaves * scales_per_octave)) + 1
        periods = period_min * 2.0 ** (np.arange(n) / scales_per_octave)
        periods = periods[periods <= period_max * (1 + 1e-9)]
        return cls(periods=periods)

    @property
    def n_scales(self) -> int:
        return len(self.periods)

    def band(self, lo: float, hi: float) -> tuple[int, int]:
        """Half-open index range of scales with period in [lo, hi]."""
        mask = (self.periods >= lo * (1 - 1e-9)) & (self.periods <= hi * (1 + 1e-9))
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            raise WaveletError(f"no scales with period in [{lo}, {hi}]")
        return int(idx[0]), int(idx[-1]) + 1


@dataclass(frozen=True)
class Scalogram:
    """CWT coefficients, rows fine to coarse matching the bank."""

    coefficients: np.ndarray
    bank: ScaleBank
    frame_period: float

    def __post_init__(self) -> None:
        if self.coefficients.shape[0] != self.bank.n_scales:
            raise WaveletError("coefficient rows must match bank size")
        self.coefficients.flags.writeable = False

    @property
    def n_frames(self) -> int:
        return self.coefficients.shape[1]


def cwt(signal: ProsodicSignal, bank: ScaleBank) -> Scalogram:
    """Transform a signal against every scale in the bank.

    Each kernel is the Mexican hat sampled at the scale implied by the
    bank period, truncated at ±5 scale units, L2-normalized after sampling,
    and correlated with reflective edge padding. Linear in the input:
    cwt(a*x + b*y) == a*cwt(x) + b*cwt(y) to float precision.
    """
    values = signal.values
    if len(values) < 2:
        raise WaveletError("signal must have at least 2 frames")
    rows = np.empty((bank.n_scales, len(values)))
    for k, period in enumerate(bank.periods):
        scale_frames = period * CENTER_FREQUENCY / signal.frame_period
        half = max(1, math.ceil(_KERNEL_HALF_WIDTH * scale_frames))
        kernel = mexican_hat(np.arange(-half, half + 1) / scale_frames)
        kernel /= np.linalg.norm(kernel)
        rows[k] = correlate1d(values, kernel, mode="reflect")
    return Scalogram(coefficients=rows, bank=bank,
                     frame_period=signal.frame_period)


@dataclass(frozen=True)
class LinePoint:
    """One extremum on a tracked line: scale row, frame, raw coefficient."""

    scale: int
    frame: int
    amplitude: float


@dataclass(frozen=True)
class Line:
    """A chain of same-polarity extrema linked across adjacent scales."""

    polarity: str
    points: tuple[LinePoint, ...]
    strength: float

    def __post_init__(self) -> None:
        if self.polarity not in ("ridge", "valley"):
            raise WaveletError(f"polarity must be ridge or valley, "
                               f"got {self.polarity!r}")
        if not self.points:
            raise WaveletError("a line needs at least one point")

    @property
    def anchor_frame(self) -> int:
        """Frame of the finest-scale point; the line's time locus."""
        return self.points[0].frame


def line_strength(points: list[LinePoint] | tuple[LinePoint, ...],
                  polarity: str, band_size: int) -> float:
    """Mean positively-rectified signed amplitude over the band.

    Each point contributes ``max(0, sign * amplitude)`` with sign +1 for
    ridges and -1 for valleys; the sum divides by the full band size, so
    lines spanning few scales are penalized.
    """
    if band_size < len(points):
        raise WaveletError("band_size must cover every point of the line")
    if band_size <= 0:
        raise WaveletError("band_size must be positive")
    sign = 1.0 if polarity == "ridge" else -1.0
    total = sum(max(0.0, sign * p.amplitude) for p in points)
    return total / band_size


def _local_extrema(row: np.ndarray) -> np.ndarray:
    """Frames of strict interior local maxima of the row."""
    if len(row) < 3:
        return np.empty(0, dtype=int)
    interior = row[1:-1]
    mask = (interior > row[:-2]) & (interior > row[2:])
    return np.flatnonzero(mask) + 1


def track_lines(scalogram: Scalogram, polarity: str, band: tuple[int, int],
                link_window_factor: float = 0.5) -> list[Line]:
    """Link per-scale extrema into lines, fine to coarse, within the band.

    At each coarser scale s the open lines claim extrema within
    ``link_window_factor * periods[s] / frame_period`` frames of their last
    point; candidate pairs are taken globally in order of (distance, line
    frame, extremum frame), each line and extremum claimed at most once.
    Unclaimed extrema start new lines. Returned lines are sorted by anchor
    frame, then by start scale.
    """
    if polarity not in ("ridge", "valley"):
        raise WaveletError(f"polarity must be ridge or valley, got {polarity!r}")
    lo, hi = band
    if not 0 <= lo < hi <= scalogram.bank.n_scales:
        raise WaveletError(f"band {band} outside bank of "
                           f"{scalogram.bank.n_scales} scales")
    sign = 1.0 if polarity == "ridge" else -1.0
    coeffs = scalogram.coefficients
    band_size = hi - lo

    open_lines: list[list[LinePoint]] = []
    closed: list[list[LinePoint]] = []
    for s in range(lo, hi):
        row = sign * coeffs[s]
        frames = _local_extrema(row)
        if s == lo:
            open_lines = [[LinePoint(s, int(f), float(coeffs[s, f]))]
                          for f in frames]
            continue
        window = link_window_factor * scalogram.bank.periods[s] / scalogram.frame_period
        # Sorting by (distance, line frame, extremum frame) makes the greedy
        # matching independent of line creation order.
        pairs = sorted(
            (abs(line[-1].frame - int(f)), line[-1].frame, int(f), li)
            for li, line in enumerate(open_lines)
            for f in frames
            if abs(line[-1].frame - int(f)) <= window)
        taken_lines: set[int] = set()
        taken_frames: set[int] = set()
        for _dist, _lf, f, li in pairs:
            if li in taken_lines or f in taken_frames:
                continue
            open_lines[li].append(LinePoint(s, f, float(coeffs[s, f])))
            taken_lines.add(li)
            taken_frames.add(f)
        survivors = []
        for li, line in enumerate(open_lines):
            if li in taken_lines:
                survivors.append(line)
            else:
                closed.append(line)
        for f in frames:
            f = int(f)
            if f not in taken_frames:
                survivors.append([LinePoint(s, f, float(coeffs[s, f]))])
        open_lines = survivors
    closed.extend(open_lines)

    lines = [Line(polarity=polarity, points=tuple(pts),
                  strength=line_strength(pts, polarity, band_size))
             for pts in closed]
    lines.sort(key=lambda l: (l.anchor_frame, l.points[0].scale))
    return lines
