"""HTTP API over a corpus for interactive inspection and tuning.

All analysis happens server-side; clients get JSON small enough to render
(series downsampled to at most MAX_POINTS values) plus the raw audio. The
utterance payload's JSON schema is served for client-side validation.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .config import Config, ConfigError, config_from_dict, config_hash
from .corpus import CorpusIndex
from .ingest import parse_alignment, read_audio
from .labeler import UtteranceAnalysis, analyze_utterance
from .signals import ProsodicSignal

MAX_POINTS = 2000

UTTERANCE_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "UtterancePayload",
    "type": "object",
    "required": ["id", "config_hash", "frame_period", "duration", "words",
                 "signals", "scalogram", "lines"],
    "additionalProperties": False,
    "properties": {
        "id": {"type": "string"},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{12}$"},
        "frame_period": {"type": "number", "exclusiveMinimum": 0},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "words": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["w", "start", "end", "prominence", "boundary",
                             "p", "b"],
                "additionalProperties": False,
                "properties": {
                    "w": {"type": "string"},
                    "start": {"type": "number"},
                    "end": {"type": "number"},
                    "prominence": {"type": "number"},
                    "boundary": {"type": "number"},
                    "p": {"type": "integer", "minimum": 0, "maximum": 2},
                    "b": {"type": "integer", "minimum": 0, "maximum": 2},
                },
            },
        },
        "signals": {
            "type": "object",
            "required": ["f0", "energy", "duration", "prominence", "boundary"],
            "additionalProperties": False,
            "properties": {
                name: {
                    "type": "object",
                    "required": ["values", "stride", "n_frames"],
                    "additionalProperties": False,
                    "properties": {
                        "values": {"type": "array",
                                   "items": {"type": "number"}},
                        "stride": {"type": "integer", "minimum": 1},
                        "n_frames": {"type": "integer", "minimum": 1},
                    },
                } for name in ("f0", "energy", "duration", "prominence",
                               "boundary")
            },
        },
        "scalogram": {
            "type": "object",
            "required": ["periods", "stride", "values"],
            "additionalProperties": False,
            "properties": {
                "periods": {"type": "array", "items": {"type": "number"}},
                "stride": {"type": "integer", "minimum": 1},
                "values": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "lines": {
            "type": "object",
            "required": ["ridges", "valleys"],
            "additionalProperties": False,
            "properties": {
                kind: {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["strength", "points"],
                        "additionalProperties": False,
                        "properties": {
                            "strength": {"type": "number"},
                            "points": {
                                "type": "array",
                                "items": {
                                    "type": "array",
                                    "prefixItems": [
                                        {"type": "integer"},
                                        {"type": "integer"},
                                        {"type": "number"},
                                    ],
                                    "minItems": 3,
                                    "maxItems": 3,
                                },
                            },
                        },
                    },
                } for kind in ("ridges", "valleys")
            },
        },
    },
}


def _series_payload(signal: ProsodicSignal) -> dict:
    stride = max(1, math.ceil(len(signal) / MAX_POINTS))
    values = signal.values[::stride]
    return {"values": [round(float(v), 5) for v in values],
            "stride": stride, "n_frames": len(signal)}


def _analysis_payload(analysis: UtteranceAnalysis, duration: float,
                      cfg_hash: str) -> dict:
    scalogram = analysis.prominence_scalogram
    stride = max(1, math.ceil(scalogram.n_frames / MAX_POINTS))
    return {
        "id": analysis.utterance_id,
        "config_hash": cfg_hash,
        "frame_period": analysis.prominence_signal.frame_period,
        "duration": duration,
        "words": [
            {"w": w.word, "start": round(w.start, 4), "end": round(w.end, 4),
             "prominence": round(w.prominence, 4),
             "boundary": round(w.boundary, 4), "p": w.p_class, "b": w.b_class}
            for w in analysis.words
        ],
        "signals": {
            "f0": _series_payload(analysis.f0),
            "energy": _series_payload(analysis.energy),
            "duration": _series_payload(analysis.duration),
            "prominence": _series_payload(analysis.prominence_signal),
            "boundary": _series_payload(analysis.boundary_signal),
        },
        "scalogram": {
            "periods": [round(float(p), 6) for p in scalogram.bank.periods],
            "stride": stride,
            "values": [[round(float(v), 5) for v in row[::stride]]
                       for row in scalogram.coefficients],
        },
        "lines": {
            "ridges": [{"strength": round(l.strength, 4),
                        "points": [[p.scale, p.frame, round(p.amplitude, 5)]
                                   for p in l.points]}
                       for l in analysis.ridges],
            "valleys": [{"strength": round(l.strength, 4),
                         "points": [[p.scale, p.frame, round(p.amplitude, 5)]
                                    for p in l.points]}
                        for l in analysis.valleys],
        },
    }


def create_app(index: CorpusIndex, config: Config | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    """Build the API over one corpus with a default configuration."""
    base_config = config or Config()
    app = FastAPI(title="prosomark", version="0.1.0")
    info_cache: dict[str, dict] = {}
    analysis_cache: dict[tuple[str, str], dict] = {}

    def _entry_or_404(utterance_id: str):
        try:
            return index.get(utterance_id)
        except Exception as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def _utterance_info(entry) -> dict:
        cached = info_cache.get(entry.utterance_id)
        if cached is None:
            alignment = parse_alignment(entry.alignment_path)
            audio = read_audio(entry.audio_path)
            cached = {
                "id": entry.utterance_id,
                "n_words": len(alignment.non_silence_words()),
                "duration": round(audio.duration, 4),
            }
            info_cache[entry.utterance_id] = cached
        return cached

    def _analyze(utterance_id: str, cfg: Config) -> dict:
        key = (utterance_id, config_hash(cfg))
        cached = analysis_cache.get(key)
        if cached is None:
            entry = _entry_or_404(utterance_id)
            audio = read_audio(entry.audio_path)
            alignment = parse_alignment(entry.alignment_path)
            try:
                analysis = analyze_utterance(audio, alignment, cfg)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            cached = _analysis_payload(analysis, round(audio.duration, 4),
                                       config_hash(cfg))
            analysis_cache[key] = cached
        return cached

    def _parse_config_param(raw: str | None) -> Config:
        if not raw:
            return base_config
        try:
            return config_from_dict(json.loads(raw), base=base_config)
        except (json.JSONDecodeError, ConfigError) as exc:
            raise HTTPException(status_code=422,
                                detail=f"bad config: {exc}") from exc

    @app.get("/api/utterances")
    def list_utterances() -> list[dict]:
        return [_utterance_info(entry) for entry in index]

    @app.get("/api/utterance/{utterance_id}")
    def get_utterance(utterance_id: str, config: str | None = None) -> dict:
        return _analyze(utterance_id, _parse_config_param(config))

    @app.post("/api/annotate")
    def annotate(body: dict) -> dict:
        if not isinstance(body, dict) or "id" not in body:
            raise HTTPException(status_code=422, detail="body needs an 'id'")
        overrides = body.get("config") or {}
        try:
            cfg = config_from_dict(overrides, base=base_config)
        except ConfigError as exc:
            raise HTTPException(status_code=422,
                                detail=f"bad config: {exc}") from exc
        return _analyze(body["id"], cfg)

    @app.get("/api/audio/{utterance_id}")
    def get_audio(utterance_id: str) -> FileResponse:
        entry = _entry_or_404(utterance_id)
        return FileResponse(entry.audio_path, media_type="audio/wav")

    @app.get("/api/config")
    def get_config() -> dict:
        return {"config": base_config.to_dict(),
                "hash": config_hash(base_config)}

    @app.get("/api/schema")
    def get_schema() -> dict:
        return UTTERANCE_SCHEMA

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="static")
    return app


def run_server(index: CorpusIndex, config: Config | None = None,
               host: str = "127.0.0.1", port: int = 8532,
               static_dir: str | Path | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(index, config, static_dir), host=host, port=port,
                log_level="warning")
