from __future__ import annotations

import datetime as dt

import pytest

from deenkit.core import referenced_tags
from deenkit.dua import load_duas, render_entry
from deenkit.engine import OUT_OF_SCOPE_EN, AskRequest, Engine, EngineError, KeywordGateScorer, gate
from deenkit.providers import FailingTextGenerator, ScriptedTextGenerator, StubTextGenerator
from deenkit.retrieval import ABSTAIN_FIQH_EN
from deenkit.zakat import ZakatAssets

ROUTED = [
    ("Assalamu alaikum", "tool", "greeting"),
    ("I have $10,000 cash and 100 grams of gold. How much zakat?", "calculation", "zakat_calculation"),
    ("My father died leaving a wife, 2 sons and a daughter. The estate is $120,000.", "calculation", "inheritance_calculation"),
    ("What does 2:255 say?", "quran", "quran_retrieval"),
    ("What is the dua before eating?", "tool", "dua_lookup"),
    ("When is Eid al-Fitr?", "tool", "islamic_calendar"),
    ("Prayer times in Cairo", "tool", "prayer_times"),
    ("Is it permissible to pray with shoes on?", "retrieval", "fiqh_ruling"),
]


@pytest.mark.parametrize("query,route,intent", ROUTED)
def test_end_to_end_routes(engine, query, route, intent):
    out = engine.serve_ask(query).to_dict()
    assert out["route"] == route
    assert out["tool_metadata"]["intent"]["intent"] == intent
    cites, verses = referenced_tags(out["answer"])
    have = {(r["kind"], r["tag"]) for r in out["references"]}
    assert {("cite", n) for n in cites} | {("quran", n) for n in verses} <= have


def test_out_of_scope_short_circuits(engine):
    out = engine.serve_ask("What is the weather in Paris tomorrow?")
    assert out.route == "out_of_scope" and out.answer == OUT_OF_SCOPE_EN


def test_gate_can_be_disabled(engine):
    out = engine.serve_ask(AskRequest("What is the weather in Paris tomorrow?", overrides={"gate.enabled": False}))
    assert out.route != "out_of_scope"


def test_gate_fails_open():
    class Broken:
        def score(self, query):
            raise RuntimeError("model not loaded")

    assert gate("anything", Broken()).is_islamic
    assert not gate("stock prices", KeywordGateScorer()).is_islamic


def test_calculation_answers_match_tools(engine):
    out = engine.serve_ask("My father died leaving a wife, 2 sons and a daughter. The estate is $120,000.")
    (o,) = out.tool_metadata["inheritance"]["outcomes"]
    got = {r["heir"]: (r["share"]["num"], r["share"]["den"]) for r in o["shares"]}
    assert got == {"wife": (1, 8), "son": (7, 10), "daughter": (7, 40)}


def test_zakat_tool_direct(engine):
    got = engine.zakat_tool(ZakatAssets(cash="10000"), gold_price="75", silver_price="0.9")
    assert got["monetary_due"] == "250.00"


def test_dua_answer_is_stored_text(engine):
    out = engine.serve_ask("What is the dua before eating?")
    assert out.answer in {render_entry(e) for e in load_duas()}


def test_every_route_survives_provider_failure(store):
    eng = Engine(generator=FailingTextGenerator(), today=lambda: dt.date(2025, 3, 10), quran_store=store)
    for query, route, _intent in ROUTED:
        out = eng.serve_ask(query)
        assert out.answer.strip()
        assert out.trace.warnings


def test_fiqh_abstains_when_provider_fails(store):
    eng = Engine(generator=FailingTextGenerator(), quran_store=store)
    assert eng.serve_ask("Is it permissible to pray with shoes on?").answer == ABSTAIN_FIQH_EN


def test_dangling_tag_from_provider_never_reaches_user(store):
    gen = ScriptedTextGenerator({"answer_fiqh": "Allowed [CITE:1]. Also obligatory [CITE:40]."})
    out = Engine(generator=gen, quran_store=store).serve_ask("Is it permissible to pray with shoes on?")
    assert "[CITE:40]" not in out.answer and "[CITE:1]" in out.answer


def test_deterministic_ids_and_traces(engine):
    a = engine.serve_ask("When is Eid al-Fitr?").to_dict()
    b = engine.serve_ask("When is Eid al-Fitr?").to_dict()
    assert a == b
    assert len(a["request_id"]) == 16


def test_explicit_request_id_is_kept(engine):
    assert engine.serve_ask(AskRequest("salam", request_id="abc")).trace.request_id == "abc"


@pytest.mark.parametrize("kwargs", [{"query": "  "}, {"query": "x", "language": "fr"}, {"query": "x", "policy": "salafi"}])
def test_bad_requests(kwargs):
    with pytest.raises(ValueError):
        AskRequest(**kwargs)


def test_validation_errors_are_typed(engine):
    with pytest.raises(EngineError) as err:
        engine.serve_ask("Quran 200:1 please")
    assert err.value.kind == "validation"
    assert err.value.request_id


def test_policy_pins_one_view(engine):
    q = "A man died leaving his grandfather and a full brother. Estate 1000."
    assert len(engine.serve_ask(q).tool_metadata["inheritance"]["outcomes"]) == 2
    assert len(engine.serve_ask(AskRequest(q, policy="hanafi")).tool_metadata["inheritance"]["outcomes"]) == 1


def test_request_overrides_do_not_leak(engine):
    before = engine.config
    engine.serve_ask(AskRequest("Prayer times in Cairo", overrides={"prayer.method": "ISNA"}))
    assert engine.config is before


def test_stub_generator_is_default():
    assert isinstance(Engine().generator, StubTextGenerator)
