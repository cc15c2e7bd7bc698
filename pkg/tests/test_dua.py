from __future__ import annotations

import json
from importlib import resources

import pytest

from deenkit.config import EngineConfig
from deenkit.core import ExecutionTrace, ValidationError
from deenkit.dua import FALLBACK_AR, FALLBACK_EN, DuaStore, load_duas, render_entry
from deenkit.providers import FailingTextGenerator, ScriptedTextGenerator, StubTextGenerator, TrigramEmbedder


def _stored():
    text = resources.files("deenkit.data").joinpath("duas.jsonl").read_text(encoding="utf-8")
    return {r["page_title"]: r for r in map(json.loads, filter(str.strip, text.splitlines()))}


@pytest.fixture(scope="module")
def duas():
    return DuaStore(load_duas(), TrigramEmbedder())


@pytest.mark.parametrize(
    "query,title",
    [
        ("What dua do I say before eating?", "before_eating"),
        ("dua when leaving the house", "leaving_home"),
        ("what to say when it rains", "rain"),
        ("دعاء عند دخول المسجد", "entering_mosque"),
    ],
)
def test_selected_entry_is_byte_identical(duas, query, title):
    got = duas.lookup(query, StubTextGenerator())
    assert got.stage == "selected"
    assert got.entry.page_title == title
    raw = _stored()[title]
    assert got.entry.arabic.encode() == raw["arabic"].encode()
    assert got.entry.translation.encode() == raw["translation"].encode()
    assert got.text == f"{raw['arabic']}\n{raw['translation']} [CITE:1]"
    assert got.citations[0].source_url == raw["reference_url"]


def test_selector_none_returns_fallback(duas):
    got = duas.lookup("dua before eating", ScriptedTextGenerator({"dua_selector": "none"}))
    assert (got.entry, got.text, got.stage) == (None, FALLBACK_EN, "selector_none")


def test_no_candidates_returns_fallback(duas):
    got = duas.lookup("zzqx", StubTextGenerator(), EngineConfig(dua_min_similarity=0.99))
    assert got.stage == "no_candidates" and got.text == FALLBACK_EN


def test_arabic_fallback(duas):
    got = duas.lookup("دعاء قبل الأكل", ScriptedTextGenerator({"dua_selector_ar": "none"}))
    assert got.text == FALLBACK_AR


@pytest.mark.parametrize("scripted", [RuntimeError("down"), "I think number 99", "0"])
def test_selector_failure_degrades_to_top_candidate(duas, scripted):
    trace = ExecutionTrace()
    got = duas.lookup("dua before eating", ScriptedTextGenerator({"dua_selector": scripted}), trace=trace)
    assert got.stage == "stage1_degraded"
    assert got.entry.page_title == got.candidates[0][0]
    assert got.text == render_entry(got.entry)
    assert trace.warnings


def test_every_output_is_stored_or_fallback(duas):
    allowed = {render_entry(e) for e in duas.entries} | {FALLBACK_EN, FALLBACK_AR}
    for gen in (StubTextGenerator(), FailingTextGenerator()):
        for q in ["dua for my parents", "anger", "sleep", "travel", "exam", "unrelated words entirely", "الكرب"]:
            assert duas.lookup(q, gen).text in allowed


def test_candidates_respect_top_k_and_floor(duas):
    c = duas.candidates("dua", top_k=3, min_similarity=-1.0)
    assert len(c) == 3
    assert [s for _e, s in c] == sorted((s for _e, s in c), reverse=True)


def test_loader_rejects_bad_files(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text('{"page_title": "x"}\n', encoding="utf-8")
    with pytest.raises(ValidationError):
        load_duas(p)
    row = json.dumps({"page_title": "x", "occasion": "o", "arabic": "a", "translation": "t", "reference_url": "u"})
    p.write_text(row + "\n" + row + "\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_duas(p)
