"""HTTP API: payload schema, caching-safe reads, config overrides."""

from __future__ import annotations

import json

import jsonschema
import pytest
from fastapi.testclient import TestClient

from prosomark.config import Config, config_hash
from prosomark.corpus import CorpusIndex
from prosomark.labeler import discretize
from prosomark.server import MAX_POINTS, UTTERANCE_SCHEMA, create_app


@pytest.fixture(scope="module")
def client(corpus_dir):
    full = CorpusIndex.from_directory(corpus_dir)
    index = CorpusIndex(entries=full.entries[:5], root=full.root)
    app = create_app(index)
    with TestClient(app) as c:
        yield c


def test_list_utterances(client):
    rows = client.get("/api/utterances").json()
    assert len(rows) == 5
    for row in rows:
        assert set(row) == {"id", "n_words", "duration"}
        assert row["n_words"] > 0
        assert row["duration"] > 0


def test_utterance_payload_matches_schema(client):
    uid = client.get("/api/utterances").json()[0]["id"]
    payload = client.get(f"/api/utterance/{uid}").json()
    jsonschema.validate(payload, UTTERANCE_SCHEMA)
    assert payload["id"] == uid
    assert payload["config_hash"] == config_hash(Config())
    assert len(payload["scalogram"]["periods"]) == 13
    assert len(payload["scalogram"]["values"]) == 13


def test_series_downsampling_honors_point_budget(client):
    uid = client.get("/api/utterances").json()[0]["id"]
    payload = client.get(f"/api/utterance/{uid}").json()
    for name, series in payload["signals"].items():
        assert len(series["values"]) <= MAX_POINTS, name
        expected = -(-series["n_frames"] // series["stride"])   # ceil div
        assert len(series["values"]) == expected, name
    sc = payload["scalogram"]
    for row in sc["values"]:
        assert len(row) <= MAX_POINTS


def test_annotate_with_threshold_override(client):
    uid = client.get("/api/utterances").json()[1]["id"]
    body = {"id": uid,
            "config": {"prominence_thresholds": [0.1, 0.3],
                       "boundary_thresholds": [0.1, 0.3]}}
    payload = client.post("/api/annotate", json=body).json()
    assert payload["config_hash"] != config_hash(Config())
    # classes must equal a client-side rediscretization of the strengths
    for word in payload["words"]:
        assert word["p"] == discretize(word["prominence"], (0.1, 0.3))
        assert word["b"] == discretize(word["boundary"], (0.1, 0.3))


def test_config_query_param(client):
    uid = client.get("/api/utterances").json()[0]["id"]
    raw = json.dumps({"weights": {"f0": 2.0}})
    resp = client.get(f"/api/utterance/{uid}", params={"config": raw})
    assert resp.status_code == 200
    assert resp.json()["config_hash"] != config_hash(Config())


def test_unknown_utterance_is_404(client):
    assert client.get("/api/utterance/ghost").status_code == 404
    assert client.get("/api/audio/ghost").status_code == 404


def test_bad_config_is_422(client):
    uid = client.get("/api/utterances").json()[0]["id"]
    resp = client.get(f"/api/utterance/{uid}",
                      params={"config": '{"f0_min": -1}'})
    assert resp.status_code == 422
    resp = client.post("/api/annotate",
                       json={"id": uid, "config": {"bogus_key": 1}})
    assert resp.status_code == 422
    assert client.post("/api/annotate", json={"config": {}}).status_code == 422
    resp = client.get(f"/api/utterance/{uid}", params={"config": "{oops"})
    assert resp.status_code == 422


def test_audio_endpoint_serves_wav(client):
    uid = client.get("/api/utterances").json()[0]["id"]
    resp = client.get(f"/api/audio/{uid}")
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "audio/wav"
    assert resp.content[:4] == b"RIFF"


def test_config_endpoint(client):
    payload = client.get("/api/config").json()
    assert payload["hash"] == config_hash(Config())
    assert payload["config"]["frame_period"] == 0.005


def test_schema_endpoint(client):
    assert client.get("/api/schema").json() == UTTERANCE_SCHEMA


def test_repeat_requests_are_stable(client):
    uid = client.get("/api/utterances").json()[2]["id"]
    first = client.get(f"/api/utterance/{uid}").json()
    second = client.get(f"/api/utterance/{uid}").json()
    assert first == second
