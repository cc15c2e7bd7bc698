from __future__ import annotations

import json
from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deenkit.core import ExecutionTrace
from deenkit.providers import FailingTextGenerator, ScriptedTextGenerator, StubTextGenerator, TrigramEmbedder
from deenkit.router import (
    IntentLabel,
    Route,
    Router,
    RouterDecision,
    evaluate_router,
    margin_confidence,
    parse_classifier_json,
    route,
)

sim = st.floats(-1.0, 1.0, allow_nan=False)


def _eval_records():
    text = resources.files("deenkit.data").joinpath("router_eval.jsonl").read_text(encoding="utf-8")
    return [json.loads(ln) for ln in text.splitlines() if ln.strip()]


@pytest.fixture(scope="module")
def embedder():
    return TrigramEmbedder()


@given(sim)
def test_equal_similarities_give_half(s):
    assert margin_confidence(s, s) == 0.5


@given(sim, sim, sim)
def test_confidence_is_monotone_in_margin(a, b, c):
    lo, hi = sorted((b, c))
    assert margin_confidence(a, hi) <= margin_confidence(a, lo)
    assert margin_confidence(hi, a) >= margin_confidence(lo, a)


@given(st.floats(-10.0, 10.0, allow_nan=False), st.floats(-10.0, 10.0, allow_nan=False))
def test_confidence_is_clamped(a, b):
    assert 0.0 <= margin_confidence(a, b) <= 1.0


def test_every_intent_has_a_route():
    assert {route(lab) for lab in IntentLabel} == set(Route)


@pytest.mark.parametrize(
    "raw",
    [
        "",
        "not json at all",
        '{"question_type": "weather", "confidence": 0.9}',
        '{"question_type": "greeting", "confidence": "high"}',
        '{"question_type": "greeting", "confidence": 1.5}',
        '{"question_type": "greeting", "confidence": 0.9, "language": "fr"}',
        '{"question_type": "greeting", "confidence": 0.9, "subquestions": "x"}',
        '{"confidence": 0.9}',
    ],
)
def test_malformed_output_is_none(raw):
    assert parse_classifier_json(raw, "hello") is None


def test_wrapped_output_is_parsed():
    raw = '<think>hmm</think>\n```json\n{"question_type": "dua_lookup", "confidence": 0.8}\n```'
    got = parse_classifier_json(raw, "dua before sleep")
    assert got.intent is IntentLabel.DUA_LOOKUP and got.language == "en" and got.requires_retrieval


@pytest.mark.parametrize(
    "scripted",
    [
        "garbage",
        '{"question_type": "fiqh_ruling", "confidence": 0.3}',
        RuntimeError("timeout"),
    ],
)
def test_bad_primary_reaches_fallback(scripted, embedder):
    router = Router(ScriptedTextGenerator({"router": scripted}), embedder)
    trace = ExecutionTrace()
    got = router.classify("What is the dua for entering the house?", trace)
    assert got.origin == "fallback"
    assert 0.0 <= got.confidence <= 1.0


def test_confident_primary_is_kept(embedder):
    router = Router(ScriptedTextGenerator({"router": '{"question_type": "greeting", "confidence": 0.5}'}), embedder)
    assert router.classify("salam").origin == "primary"


@given(st.text(min_size=1, max_size=80).filter(str.strip))
def test_fallback_is_total_and_deterministic(q):
    router = _ROUTER
    a, b = router.classify(q), router.classify(q)
    assert isinstance(a, RouterDecision)
    assert a == b


_ROUTER = Router(FailingTextGenerator(), TrigramEmbedder())


def test_empty_query_is_rejected(embedder):
    with pytest.raises(ValueError):
        Router(StubTextGenerator(), embedder).classify("   ")


def test_evaluation_report_shape(embedder):
    report = evaluate_router(Router(StubTextGenerator(), embedder).classify, _eval_records())
    assert report["total"] == 50
    assert report["correct"] == report["total"] - len(report["errors"])
    assert set(report["per_intent_recall"]) == {lab.value for lab in IntentLabel}


def test_evaluation_rejects_unknown_label(embedder):
    with pytest.raises(ValueError):
        evaluate_router(Router(StubTextGenerator(), embedder).classify, [{"query": "x", "intent": "weather"}])
