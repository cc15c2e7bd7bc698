from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deenkit.config import EngineConfig
from deenkit.core import AssemblyError, Citation, ExecutionTrace, assemble_response, referenced_tags
from deenkit.providers import FailingTextGenerator, ScriptedTextGenerator, StubTextGenerator, TrigramEmbedder
from deenkit.retrieval import (
    ABSTAIN_FIQH_EN,
    ABSTAIN_GENERAL_AR,
    DocumentChunk,
    DocumentStore,
    EvidenceSet,
    RetrievalParams,
    answer_fiqh,
    answer_general,
    attach_verses,
    default_document_store,
    fit_budget,
    ingest_docs,
    read_chunks,
    tag_evidence,
    verify_tags,
)

CHUNKS = [
    DocumentChunk("a1", "Wudu is required before the obligatory prayer.", "Book A", "https://a.example/1", "fiqh"),
    DocumentChunk("a2", "Wiping over leather socks is allowed during wudu.", "Book A", "https://a.example/2", "fiqh"),
    DocumentChunk("a3", "Wudu is broken by sleep while lying down.", "Book A", None, "fiqh"),
    DocumentChunk("a4", "Wudu intention is made in the heart.", "Book A", None, "fiqh"),
    DocumentChunk("b1", "The Battle of Badr took place in the second year after the Hijra.", "Book B", None, "history"),
]


@pytest.fixture(scope="module")
def small_store():
    return DocumentStore.build(CHUNKS, TrigramEmbedder())


def _evidence(n):
    return tag_evidence(CHUNKS[:n])


def test_diversity_cap_limits_one_source(small_store):
    hits = small_store.retrieve("wudu", RetrievalParams(top_k=5, min_similarity=-1.0, diversity=2))
    assert sum(h.chunk.source_title == "Book A" for h in hits) == 2


def test_collection_filter(small_store):
    hits = small_store.retrieve("wudu badr", RetrievalParams(min_similarity=-1.0, collections={"history"}))
    assert [h.chunk.chunk_id for h in hits] == ["b1"]


def test_similarity_floor_and_order(small_store):
    hits = small_store.retrieve("wudu", RetrievalParams(min_similarity=0.1, diversity=10))
    scores = [h.score for h in hits]
    assert scores == sorted(scores, reverse=True)
    assert all(s >= 0.1 for s in scores)


def test_top_k_is_clamped():
    assert RetrievalParams(top_k=1).top_k == 5
    assert RetrievalParams(top_k=500).top_k == 50


def test_default_store_has_notes_and_verses():
    store = default_document_store(TrigramEmbedder())
    assert {c.collection for c in store.chunks} >= {"quran", "fiqh", "hadith"}


def test_ingest_round_trip(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text("\n".join(json.dumps(c.to_dict()) for c in CHUNKS), encoding="utf-8")
    emb = TrigramEmbedder()
    ingest_docs(src, tmp_path / "out", emb)
    assert read_chunks(tmp_path / "out" / "docs.jsonl") == CHUNKS
    loaded = DocumentStore.load(tmp_path / "out", emb)
    # stored as float32
    assert abs(loaded.matrix - DocumentStore.build(CHUNKS, emb).matrix).max() < 1e-6


def test_verify_tags_drops_only_bad_sentences():
    ev = _evidence(2)
    text, removed = verify_tags("Wudu is needed [CITE:1]. Socks are fine [CITE:2]. Made up [CITE:7]. Also [Q1].", ev)
    assert removed == 2
    assert text == "Wudu is needed [CITE:1]. Socks are fine [CITE:2]."


tags = st.one_of(st.integers(0, 12).map(lambda n: f"[CITE:{n}]"), st.integers(0, 5).map(lambda n: f"[Q{n}]"))
sentences = st.lists(st.tuples(st.sampled_from(["Alpha", "Beta", "Gamma", "لا"]), st.lists(tags, max_size=3)), max_size=8)


@given(sentences, st.integers(0, 5))
def test_verified_text_never_has_unknown_tags(parts, n):
    ev = _evidence(n)
    raw = " ".join(f"{w} {' '.join(t)}." for w, t in parts)
    text, _removed = verify_tags(raw, ev)
    cites, verses = referenced_tags(text)
    assert cites <= ev.cite_tags() and verses <= ev.verse_tags()


def test_empty_evidence_abstains_without_calling_provider():
    gen = ScriptedTextGenerator({"answer_fiqh": RuntimeError("must not be called")})
    got = answer_fiqh("is music allowed", EvidenceSet(), gen, EngineConfig())
    assert got.abstained and got.text == ABSTAIN_FIQH_EN
    assert gen.calls == []


def test_provider_failure_abstains_in_arabic():
    got = answer_general("ما هي غزوة بدر", _evidence(5), FailingTextGenerator(), EngineConfig(), lang="ar")
    assert got.abstained and got.text == ABSTAIN_GENERAL_AR


def test_answer_made_only_of_bad_tags_abstains():
    gen = ScriptedTextGenerator({"answer_general": "Invented [CITE:9]."})
    got = answer_general("badr", _evidence(5), gen, EngineConfig())
    assert got.abstained and got.removed_sentences == 1


def test_stub_answer_is_grounded():
    got = answer_fiqh("Is wudu required before prayer?", _evidence(4), StubTextGenerator(), EngineConfig())
    assert not got.abstained
    cites, _v = referenced_tags(got.text)
    assert cites and cites <= {c.tag for c in got.citations}


def test_explicit_verse_is_attached_verbatim(store):
    ev = attach_verses(EvidenceSet(), ["see 2:255 and 2:255 and 112:1-4"])
    assert len(ev.verses) == 2
    assert ev.verses[0].arabic == store.verses(2, 255, 255)[0].ayah_text
    assert ev.verses[1].arabic == " ".join(r.ayah_text for r in store.verses(112, 1, 4))


def test_budget_drops_lowest_ranked_first():
    ev = _evidence(5)
    fitted = fit_budget(ev, len(ev.render()) - 1)
    assert [i.tag for i in fitted.items] == [1, 2, 3, 4]
    assert fit_budget(ev, 0).items == ()


def test_assembly_rejects_dangling_tags():
    trace = ExecutionTrace()
    with pytest.raises(AssemblyError):
        assemble_response("text [CITE:2]", [Citation(1, "x")], trace, "retrieval")
    with pytest.raises(AssemblyError):
        assemble_response("text [Q1]", [Citation(1, "x")], trace, "retrieval")
    out = assemble_response("text [CITE:1]", [Citation(1, "x", "https://x")], trace, "retrieval")
    assert out.render().endswith("[CITE:1] x (https://x)")
