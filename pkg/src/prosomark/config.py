"""Analysis configuration: one flat set of tunables shared by CLI and API.

Configs load from TOML, serialize back to TOML, and hash to a short stable
token stamped into annotation records so outputs are traceable to settings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .signals import SignalWeights

_OOV_POLICIES = ("graphemes", "error")


class ConfigError(ValueError):
    """Invalid configuration value or file."""


@dataclass(frozen=True)
class Config:
    """All analysis tunables with their defaults."""

    frame_period: float = 0.005
    f0_min: float = 60.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.45
    energy_band: tuple[float, float] | None = None
    weights: SignalWeights = field(default_factory=SignalWeights)
    scales_per_octave: int = 2
    period_min: float = 0.08
    period_max: float = 5.12
    word_band: tuple[float, float] = (0.16, 1.28)
    phrase_band: tuple[float, float] = (0.64, 5.12)
    link_window_factor: float = 0.5
    prominence_thresholds: tuple[float, float] = (0.4, 1.0)
    boundary_thresholds: tuple[float, float] = (0.35, 0.9)
    oov_policy: str = "graphemes"

    def __post_init__(self) -> None:
        if not 0 < self.frame_period <= 0.1:
            raise ConfigError("frame_period must be in (0, 0.1] seconds")
        if not 0 < self.f0_min < self.f0_max:
            raise ConfigError("need 0 < f0_min < f0_max")
        if not 0 < self.voicing_threshold < 1:
            raise ConfigError("voicing_threshold must be in (0, 1)")
        if self.energy_band is not None and not (
                0 < self.energy_band[0] < self.energy_band[1]):
            raise ConfigError("energy_band must be an increasing positive pair")
        if self.scales_per_octave < 1:
            raise ConfigError("scales_per_octave must be >= 1")
        if not 0 < self.period_min < self.period_max:
            raise ConfigError("need 0 < period_min < period_max")
        for name in ("word_band", "phrase_band"):
            lo, hi = getattr(self, name)
            if not 0 < lo < hi:
                raise ConfigError(f"{name} must be an increasing positive pair")
        if self.link_window_factor <= 0:
            raise ConfigError("link_window_factor must be positive")
        for name in ("prominence_thresholds", "boundary_thresholds"):
            t1, t2 = getattr(self, name)
            if not t1 < t2:
                raise ConfigError(f"{name} must satisfy t1 < t2")
        if self.oov_policy not in _OOV_POLICIES:
            raise ConfigError(f"oov_policy must be one of {_OOV_POLICIES}")

    def to_dict(self) -> dict[str, Any]:
        """Plain-JSON form; tuples become lists, absent band becomes []."""
        return {
            "frame_period": self.frame_period,
            "f0_min": self.f0_min,
            "f0_max": self.f0_max,
            "voicing_threshold": self.voicing_threshold,
            "energy_band": list(self.energy_band) if self.energy_band else [],
            "weights": {"f0": self.weights.f0, "energy": self.weights.energy,
                        "duration": self.weights.duration},
            "scales_per_octave": self.scales_per_octave,
            "period_min": self.period_min,
            "period_max": self.period_max,
            "word_band": list(self.word_band),
            "phrase_band": list(self.phrase_band),
            "link_window_factor": self.link_window_factor,
            "thresholds": {"prominence": list(self.prominence_thresholds),
                           "boundary": list(self.boundary_thresholds)},
            "oov_policy": self.oov_policy,
        }


def config_from_dict(data: dict[str, Any], base: Config | None = None) -> Config:
    """Build a Config from a (possibly partial) dict over a base.

    Unknown keys are rejected so typos fail loudly instead of silently
    running with defaults.
    """
    base = base or Config()
    known = {f.name for f in fields(Config)} | {"thresholds"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = {}
    for key in ("frame_period", "f0_min", "f0_max", "voicing_threshold",
                "period_min", "period_max", "link_window_factor"):
        if key in data:
            kwargs[key] = float(data[key])
    if "scales_per_octave" in data:
        kwargs["scales_per_octave"] = int(data["scales_per_octave"])
    if "oov_policy" in data:
        kwargs["oov_policy"] = str(data["oov_policy"])
    if "energy_band" in data:
        band = data["energy_band"]
        kwargs["energy_band"] = tuple(float(x) for x in band) if band else None
    for key in ("word_band", "phrase_band"):
        if key in data:
            kwargs[key] = _pair(key, data[key])
    if "weights" in data:
        w = data["weights"]
        if not isinstance(w, dict) or set(w) - {"f0", "energy", "duration"}:
            raise ConfigError("weights must map f0/energy/duration to numbers")
        merged = {"f0": base.weights.f0, "energy": base.weights.energy,
                  "duration": base.weights.duration}
        merged.update({k: float(v) for k, v in w.items()})
        kwargs["weights"] = SignalWeights(**merged)
    thresholds = data.get("thresholds", {})
    if thresholds:
        extra = set(thresholds) - {"prominence", "boundary"}
        if extra:
            raise ConfigError(f"unknown threshold keys: {', '.join(sorted(extra))}")
        if "prominence" in thresholds:
            kwargs["prominence_thresholds"] = _pair("thresholds.prominence",
                                                    thresholds["prominence"])
        if "boundary" in thresholds:
            kwargs["boundary_thresholds"] = _pair("thresholds.boundary",
                                                  thresholds["boundary"])
    for key in ("prominence_thresholds", "boundary_thresholds"):
        if key in data:
            kwargs[key] = _pair(key, data[key])
    try:
        return replace(base, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _pair(name: str, value: Any) -> tuple[float, float]:
    try:
        lo, hi = value
        return (float(lo), float(hi))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a pair of numbers") from exc


def load_config(path: str | Path) -> Config:
    """Load a TOML config file; missing keys keep their defaults."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path.name}: {exc}") from exc
    return config_from_dict(data)


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {type(value).__name__} to TOML")


def dumps_toml(config: Config) -> str:
    """Serialize to TOML; load_config on the result round-trips exactly."""
    data = config.to_dict()
    weights = data.pop("weights")
    thresholds = data.pop("thresholds")
    lines = [f"{key} = {_toml_value(value)}" for key, value in data.items()]
    lines += ["", "[weights]"]
    lines += [f"{k} = {_toml_value(v)}" for k, v in weights.items()]
    lines += ["", "[thresholds]"]
    lines += [f"{k} = {_toml_value(v)}" for k, v in thresholds.items()]
    return "\n".join(lines) + "\n"


def save_config(path: str | Path, config: Config) -> None:
    Path(path).write_text(dumps_toml(config), encoding="utf-8")


def config_hash(config: Config) -> str:
    """12-hex-char digest of the canonical JSON form."""
    canonical = json.dumps(config.to_dict(), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
