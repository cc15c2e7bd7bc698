from __future__ import annotations

import pytest

ERROR_KEYS = {"error", "request_id", "trace"}


def _assert_error_shape(resp, status, kind):
    assert resp.status_code == status
    body = resp.json()
    assert set(body) == ERROR_KEYS
    assert set(body["error"]) == {"kind", "message", "stage", "route"}
    assert body["error"]["kind"] == kind


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok" and body["deterministic"] is True


def test_ask_envelope(client):
    body = client.post("/ask", json={"query": "When is Eid al-Adha?"}).json()
    assert {"request_id", "route", "answer", "references", "rendered", "tool_metadata", "trace"} <= set(body)
    assert body["route"] == "tool"


def test_request_id_header_is_honoured(client):
    body = client.post("/ask", json={"query": "salam"}, headers={"X-Request-ID": "req-42"}).json()
    assert body["request_id"] == "req-42"
    assert body["trace"]["request_id"] == "req-42"


@pytest.mark.parametrize(
    "path,payload",
    [
        ("/route", {"query": "What is the dua before sleeping?"}),
        ("/zakat", {"cash": 10000, "gold_price": 75, "silver_price": 0.9}),
        ("/inheritance", {"heirs": {"husband": 1, "daughter": 1}, "net_estate": 1000}),
        ("/quran", {"query": "2:255"}),
        ("/prayer-times", {"lat": 21.4225, "lon": 39.8262, "tz_minutes": 180, "date": "2025-06-21"}),
        ("/qibla", {"location": "London"}),
        ("/calendar", {"gregorian": "2025-06-26"}),
        ("/dua", {"query": "dua for rain"}),
    ],
)
def test_tool_endpoints(client, path, payload):
    resp = client.post(path, json=payload)
    assert resp.status_code == 200, resp.text
    body = resp.json()
    assert body["request_id"] and body["trace"]["events"]


def test_zakat_endpoint_values(client):
    got = client.post("/zakat", json={"cash": "10000", "gold_price": "75", "silver_price": "0.9"}).json()["result"]
    assert got["monetary_due"] == "250.00"


def test_calendar_endpoint_values(client):
    got = client.post("/calendar", json={"gregorian": "2025-06-26"}).json()["result"]
    assert got["hijri"] == "1447-01-01"


@pytest.mark.parametrize(
    "path,payload",
    [
        ("/ask", {"query": "   "}),
        ("/ask", {"query": "Quran 200:1"}),
        ("/zakat", {"cash": -5}),
        ("/inheritance", {"heirs": {"husband": 1, "wife": 1}}),
        ("/quran", {"query": "115:1", "subtype": "specific_verse"}),
        ("/qibla", {"lat": 10.0}),
        ("/calendar", {"hijri": "1447-13-01"}),
        ("/dua", {"query": ""}),
    ],
)
def test_validation_errors_are_422(client, path, payload):
    _assert_error_shape(client.post(path, json=payload), 422, "validation")


def test_malformed_body_is_422(client):
    resp = client.post("/ask", json={"nope": 1})
    _assert_error_shape(resp, 422, "validation")
    assert resp.json()["error"]["stage"] == "request"


def test_internal_errors_are_500(store):
    from fastapi.testclient import TestClient

    from deenkit.engine import Engine
    from deenkit.service import create_app

    class BrokenIndex:
        def retrieve(self, *args, **kwargs):
            raise RuntimeError("index corrupted")

    eng = Engine(quran_store=store, document_store=BrokenIndex())
    with TestClient(create_app(eng)) as c:
        resp = c.post("/ask", json={"query": "Is it permissible to pray with shoes on?"})
    _assert_error_shape(resp, 500, "internal")
