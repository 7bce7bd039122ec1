import json

import pytest
from fastapi.testclient import TestClient

from conftest import det_image
from rainbench.imaging import encode_image
from rainbench.survey.app import create_app
from rainbench.survey.store import replay_log

FORBIDDEN_KEYS = {"ground_truth", "truth", "label"}


@pytest.fixture()
def pools(tmp_path):
    syn_dir = tmp_path / "syn"
    real_dir = tmp_path / "real"
    syn_dir.mkdir()
    real_dir.mkdir()
    syn, real = [], []
    for i in range(8):
        p = syn_dir / f"fake_{i:02d}.png"
        p.write_bytes(encode_image(det_image(10 + i, 12, 10, channels=3)))
        syn.append(str(p))
    for i in range(6):
        p = real_dir / f"rain_{i:02d}.png"
        p.write_bytes(encode_image(det_image(50 + i, 12, 10, channels=3)))
        real.append(str(p))
    return syn, real


@pytest.fixture()
def client(pools, tmp_path):
    syn, real = pools
    app = create_app(syn, real, seed=42, log_path=tmp_path / "survey.ndjson", admin_token="hunter2")
    with TestClient(app) as c:
        yield c


def no_truth_anywhere(payload):
    """Recursively assert the payload carries no ground-truth fields."""
    if isinstance(payload, dict):
        assert not (set(payload) & FORBIDDEN_KEYS), f"leaky keys in {payload}"
        for v in payload.values():
            no_truth_anywhere(v)
    elif isinstance(payload, list):
        for v in payload:
            no_truth_anywhere(v)


def start(client):
    resp = client.post("/api/session")
    assert resp.status_code == 200
    return resp.json()


def test_session_payload_shape_and_no_labels(client):
    doc = start(client)
    assert len(doc["items"]) == 10
    no_truth_anywhere(doc)
    for item in doc["items"]:
        assert set(item) == {"item_id", "image_url"}
        assert item["image_url"] == f"/api/image/{item['item_id']}"


def test_two_sessions_are_independent(client):
    a = start(client)
    b = start(client)
    assert a["session_id"] != b["session_id"]
    # same quiz template: every participant judges the same stimuli
    assert [i["item_id"] for i in a["items"]] == [i["item_id"] for i in b["items"]]


def test_image_endpoint_serves_png(client):
    doc = start(client)
    resp = client.get(doc["items"][0]["image_url"])
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    assert resp.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_image_endpoint_404_unknown(client):
    assert client.get("/api/image/zzz").status_code == 404


def answer_items(client, doc, choice="real", items=None):
    responses = []
    for item in items or doc["items"]:
        responses.append(
            client.post(
                f"/api/session/{doc['session_id']}/answer",
                json={"item_id": item["item_id"], "choice": choice},
            )
        )
    return responses


def test_answer_flow_counts(client):
    doc = start(client)
    responses = answer_items(client, doc)
    assert [r.status_code for r in responses] == [200] * 10
    assert responses[0].json() == {"answered": 1, "remaining": 9}
    assert responses[-1].json() == {"answered": 10, "remaining": 0}


def test_duplicate_answer_409(client):
    doc = start(client)
    item = doc["items"][0]
    assert answer_items(client, doc, items=[item])[0].status_code == 200
    resp = client.post(
        f"/api/session/{doc['session_id']}/answer",
        json={"item_id": item["item_id"], "choice": "fake"},
    )
    assert resp.status_code == 409
    assert resp.json()["detail"] == "AlreadyAnswered"


def test_answer_after_complete_409(client):
    doc = start(client)
    answer_items(client, doc)
    resp = client.post(
        f"/api/session/{doc['session_id']}/answer",
        json={"item_id": doc["items"][0]["item_id"], "choice": "fake"},
    )
    assert resp.status_code == 409
    assert resp.json()["detail"] == "SessionComplete"


def test_unknown_ids_404(client):
    doc = start(client)
    assert (
        client.post("/api/session/nope/answer", json={"item_id": "q00", "choice": "real"}).status_code
        == 404
    )
    assert (
        client.post(
            f"/api/session/{doc['session_id']}/answer",
            json={"item_id": "zzz", "choice": "real"},
        ).status_code
        == 404
    )
    assert client.get("/api/session/nope/result").status_code == 404


def test_malformed_body_422(client):
    doc = start(client)
    url = f"/api/session/{doc['session_id']}/answer"
    assert client.post(url, json={"item_id": "q00", "choice": "maybe"}).status_code == 422
    assert client.post(url, json={"choice": "real"}).status_code == 422
    assert client.post(url, content=b"not json", headers={"content-type": "application/json"}).status_code == 422


def test_result_409_until_complete_then_accuracy(client):
    doc = start(client)
    url = f"/api/session/{doc['session_id']}/result"
    assert client.get(url).status_code == 409
    answer_items(client, doc, items=doc["items"][:9])
    assert client.get(url).status_code == 409  # one answer still missing
    answer_items(client, doc, items=doc["items"][9:])
    resp = client.get(url)
    assert resp.status_code == 200
    result = resp.json()
    assert len(result["items"]) == 10
    correct = sum(1 for item in result["items"] if item["correct"])
    assert result["accuracy"] == pytest.approx(correct / 10)
    # "real" for everything scores exactly the real_count fraction
    assert result["accuracy"] == pytest.approx(0.4)


def test_report_requires_admin_token(client):
    assert client.get("/api/report").status_code == 401
    assert client.get("/api/report", headers={"X-Admin-Token": "wrong"}).status_code == 401
    resp = client.get("/api/report", headers={"X-Admin-Token": "hunter2"})
    assert resp.status_code == 200
    assert resp.json()["sessions_complete"] == 0


def test_report_aggregates_matrix(client):
    doc = start(client)
    answer_items(client, doc, choice="fake")
    report = client.get("/api/report", headers={"X-Admin-Token": "hunter2"}).json()
    assert report["sessions_complete"] == 1
    matrix = report["matrix"]
    assert matrix["total"] == 10
    assert (matrix["tp"], matrix["fp"]) == (6, 4)  # all-fake answers
    assert report["metrics"]["accuracy"] == pytest.approx(0.6)


def test_event_log_replay_restores_sessions(pools, tmp_path):
    syn, real = pools
    log = tmp_path / "survey.ndjson"
    app = create_app(syn, real, seed=42, log_path=log, admin_token="t")
    with TestClient(app) as client:
        doc = start(client)
        answer_items(client, doc, items=doc["items"][:4])
    sessions = replay_log(log)
    assert doc["session_id"] in sessions
    restored = sessions[doc["session_id"]]
    assert len(restored.answers) == 4
    assert restored.state == "open"
    # restart: the same log drives a fresh app, duplicate answers still 409
    app2 = create_app(syn, real, seed=42, log_path=log, admin_token="t")
    with TestClient(app2) as client2:
        resp = client2.post(
            f"/api/session/{doc['session_id']}/answer",
            json={"item_id": doc["items"][0]["item_id"], "choice": "real"},
        )
        assert resp.status_code == 409


def test_log_is_append_only_jsonl(pools, tmp_path):
    syn, real = pools
    log = tmp_path / "survey.ndjson"
    app = create_app(syn, real, seed=1, log_path=log, admin_token="t")
    with TestClient(app) as client:
        doc = start(client)
        answer_items(client, doc, items=doc["items"][:2])
    lines = log.read_text().strip().splitlines()
    events = [json.loads(l) for l in lines]
    assert [e["event"] for e in events] == ["session", "answer", "answer"]
