"""Document retrieval, evidence tagging and grounded answering.

Evidence handed to the text provider is tagged ``[CITE:n]`` in rank order and
verses quoted verbatim are tagged ``[Qn]``. After generation every sentence
that cites a tag outside the evidence set is removed and the removal is
recorded in the trace.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Protocol, Sequence

import numpy as np

from . import prompts
from .config import EngineConfig
from .core import CITE_TAG, VERSE_TAG, Citation, ExecutionTrace, ValidationError
from .providers import Embedder, TextGenerator, embed_many
from .text import content_words, retrieval_view

COLLECTIONS = ("quran", "hadith", "fiqh", "fatwa", "history", "article")
TOP_K_RANGE = (5, 50)
MAX_VERSE_REFS = 3

ABSTAIN_FIQH_EN = (
    "I could not find enough grounded evidence to give a ruling on this question. "
    "Please consult a qualified scholar who can consider your specific circumstances."
)
ABSTAIN_FIQH_AR = "لم أجد أدلة موثقة كافية لإصدار حكم في هذه المسألة. يرجى استشارة عالم مؤهل يراعي ظروفك الخاصة."
ABSTAIN_GENERAL_EN = "I could not find enough grounded sources to answer this reliably."
ABSTAIN_GENERAL_AR = "لم أجد مصادر موثقة كافية للإجابة عن هذا السؤال بدقة."


@dataclass(frozen=True)
class DocumentChunk:
    chunk_id: str
    text: str
    source_title: str
    source_url: str | None
    collection: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "chunk_id": self.chunk_id,
            "text": self.text,
            "source_title": self.source_title,
            "source_url": self.source_url,
            "collection": self.collection,
        }


@dataclass(frozen=True)
class ScoredChunk:
    chunk: DocumentChunk
    score: float


@dataclass(frozen=True)
class RetrievalParams:
    top_k: int = 12
    min_similarity: float = 0.25
    diversity: int = 3
    rerank: bool = False
    collections: frozenset[str] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "top_k", min(max(int(self.top_k), TOP_K_RANGE[0]), TOP_K_RANGE[1]))
        object.__setattr__(self, "diversity", max(int(self.diversity), 1))
        if self.collections is not None:
            object.__setattr__(self, "collections", frozenset(self.collections))

    @classmethod
    def from_config(cls, config: EngineConfig, collections: Iterable[str] | None = None) -> "RetrievalParams":
        return cls(
            config.max_sources,
            config.min_similarity,
            config.diversity_cap,
            config.rerank,
            frozenset(collections) if collections is not None else None,
        )


class Reranker(Protocol):
    def rerank(self, query: str, hits: list[ScoredChunk]) -> list[ScoredChunk]: ...


class LexicalReranker:
    """Orders hits by shared content words with the query, then by the original score."""

    def rerank(self, query: str, hits: list[ScoredChunk]) -> list[ScoredChunk]:
        words = content_words(query)
        return sorted(hits, key=lambda h: (-len(words & content_words(h.chunk.text)), -h.score))


def embedder_id(embedder: Embedder) -> str:
    return f"{type(embedder).__name__}:{getattr(embedder, 'model', '')}:{embedder.dim}"


def _check_record(rec: dict, line: int) -> DocumentChunk:
    try:
        chunk = DocumentChunk(
            str(rec["chunk_id"]), str(rec["text"]), str(rec["source_title"]), rec.get("source_url"), str(rec["collection"])
        )
    except KeyError as exc:
        raise ValidationError(f"line {line}: missing field {exc.args[0]}") from None
    if not chunk.text.strip():
        raise ValidationError(f"line {line}: empty text")
    if chunk.collection not in COLLECTIONS:
        raise ValidationError(f"line {line}: unknown collection {chunk.collection!r}")
    return chunk


def read_chunks(path: str | Path) -> list[DocumentChunk]:
    chunks = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            chunk = _check_record(json.loads(line), n)
            if chunk.chunk_id in seen:
                raise ValidationError(f"line {n}: duplicate chunk_id {chunk.chunk_id!r}")
            seen.add(chunk.chunk_id)
            chunks.append(chunk)
    return chunks


def ingest_docs(source: str | Path, out_dir: str | Path, embedder: Embedder) -> dict[str, Any]:
    """Validate a JSONL corpus and write it with precomputed embeddings.

    Writes ``docs.jsonl``, ``docs.npy`` (float32, one unit row per chunk) and
    ``docs.meta.json`` recording the embedder and the JSONL hash.
    """
    chunks = read_chunks(source)
    if not chunks:
        raise ValidationError("corpus is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    body = "".join(json.dumps(c.to_dict(), ensure_ascii=False) + "\n" for c in chunks)
    (out / "docs.jsonl").write_text(body, encoding="utf-8")
    matrix = embed_many(embedder, [retrieval_view(c.text) for c in chunks]).astype(np.float32)
    np.save(out / "docs.npy", matrix)
    meta = {
        "embedder": embedder_id(embedder),
        "dim": int(embedder.dim),
        "chunks": len(chunks),
        "sha256": hashlib.sha256(body.encode("utf-8")).hexdigest(),
    }
    (out / "docs.meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return meta


class DocumentStore:
    """Immutable exhaustive-cosine index over document chunks."""

    def __init__(self, chunks: Sequence[DocumentChunk], matrix: np.ndarray, embedder: Embedder):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (len(chunks), embedder.dim):
            raise ValidationError(f"embedding matrix shape {matrix.shape} does not match {len(chunks)} x {embedder.dim}")
        self.chunks = tuple(chunks)
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.embedder = embedder
        self._collection = np.array([c.collection for c in self.chunks])

    @classmethod
    def build(cls, chunks: Sequence[DocumentChunk], embedder: Embedder) -> "DocumentStore":
        return cls(chunks, embed_many(embedder, [retrieval_view(c.text) for c in chunks]), embedder)

    @classmethod
    def load(cls, directory: str | Path, embedder: Embedder) -> "DocumentStore":
        """Use stored embeddings when they were made by this embedder, else recompute."""
        directory = Path(directory)
        chunks = read_chunks(directory / "docs.jsonl")
        meta_path, npy_path = directory / "docs.meta.json", directory / "docs.npy"
        if meta_path.exists() and npy_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            body = (directory / "docs.jsonl").read_text(encoding="utf-8")
            fresh = meta.get("sha256") == hashlib.sha256(body.encode("utf-8")).hexdigest()
            if fresh and meta.get("embedder") == embedder_id(embedder):
                return cls(chunks, np.load(npy_path), embedder)
        return cls.build(chunks, embedder)

    def __len__(self) -> int:
        return len(self.chunks)

    def with_chunks(self, extra: Sequence[DocumentChunk]) -> "DocumentStore":
        more = embed_many(self.embedder, [retrieval_view(c.text) for c in extra])
        return DocumentStore(self.chunks + tuple(extra), np.vstack([self.matrix, more]), self.embedder)

    def retrieve(
        self,
        query: str,
        params: RetrievalParams | None = None,
        reranker: Reranker | None = None,
        trace: ExecutionTrace | None = None,
    ) -> list[ScoredChunk]:
        params = params or RetrievalParams()
        trace = trace if trace is not None else ExecutionTrace()
        if not self.chunks:
            raise ValidationError("document store is empty")
        sims = self.matrix @ self.embedder.embed(retrieval_view(query))
        if params.collections is not None:
            sims = np.where(np.isin(self._collection, list(params.collections)), sims, -np.inf)
        order = np.argsort(-sims, kind="stable")
        hits: list[ScoredChunk] = []
        per_source: Counter[str] = Counter()
        for i in order:
            score = float(sims[i])
            if score < params.min_similarity:
                break
            chunk = self.chunks[i]
            if per_source[chunk.source_title] >= params.diversity:
                continue
            per_source[chunk.source_title] += 1
            hits.append(ScoredChunk(chunk, score))
            if len(hits) == params.top_k:
                break
        if params.rerank and hits:
            ranked = (reranker or LexicalReranker()).rerank(query, list(hits))
            if sorted(id(h) for h in ranked) != sorted(id(h) for h in hits):
                trace.warn("retrieve", "reranker did not return a permutation; original order kept")
            else:
                hits = ranked
        trace.add("retrieve", f"{len(hits)} chunk(s) above {params.min_similarity}")
        return hits


_default_lock = threading.Lock()
_default_stores: dict[str, DocumentStore] = {}


def _verse_chunks() -> list[DocumentChunk]:
    from .quran import citation_url, default_store, surah_info

    return [
        DocumentChunk(
            f"quran-{r.surah}-{r.ayah}",
            r.translation,
            f"Quran {r.surah}:{r.ayah} ({surah_info(r.surah).name_en})",
            citation_url(r.surah, r.ayah),
            "quran",
        )
        for r in default_store().all_records()
    ]


def default_document_store(embedder: Embedder, include_verses: bool = True) -> DocumentStore:
    """Bundled notes (precomputed embeddings) plus one chunk per verse translation."""
    key = f"{embedder_id(embedder)}:{id(embedder)}:{include_verses}"
    with _default_lock:
        store = _default_stores.get(key)
        if store is None:
            store = DocumentStore.load(Path(str(resources.files("deenkit.data"))), embedder)
            if include_verses:
                store = store.with_chunks(_verse_chunks())
            _default_stores[key] = store
        return store


# --- evidence ----------------------------------------------------------------------------


@dataclass(frozen=True)
class EvidenceItem:
    tag: int
    chunk: DocumentChunk
    score: float

    @property
    def label(self) -> str:
        return f"[CITE:{self.tag}]"


@dataclass(frozen=True)
class VerseEvidence:
    tag: int
    title: str
    url: str
    arabic: str
    translation: str

    @property
    def label(self) -> str:
        return f"[Q{self.tag}]"


@dataclass(frozen=True)
class EvidenceSet:
    items: tuple[EvidenceItem, ...] = ()
    verses: tuple[VerseEvidence, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.items or self.verses)

    def cite_tags(self) -> set[int]:
        return {i.tag for i in self.items}

    def verse_tags(self) -> set[int]:
        return {v.tag for v in self.verses}

    def citations(self) -> list[Citation]:
        out = [Citation(i.tag, i.chunk.source_title, i.chunk.source_url, None, "cite") for i in self.items]
        out += [Citation(v.tag, v.title, v.url, None, "quran") for v in self.verses]
        return out

    def render(self) -> str:
        # verbatim verses lead: they anchor whatever the retrieved chunks say
        lines = [f"{v.label} {v.title} :: {v.arabic} | {' '.join(v.translation.split())}" for v in self.verses]
        lines += [f"{i.label} {i.chunk.source_title} :: {' '.join(i.chunk.text.split())}" for i in self.items]
        return "\n".join(lines)


def tag_evidence(hits: Sequence[ScoredChunk | DocumentChunk]) -> EvidenceSet:
    """Dense ``[CITE:n]`` tags in rank order."""
    items = []
    for n, hit in enumerate(hits, 1):
        if isinstance(hit, ScoredChunk):
            items.append(EvidenceItem(n, hit.chunk, hit.score))
        else:
            items.append(EvidenceItem(n, hit, 0.0))
    return EvidenceSet(tuple(items))


def fit_budget(evidence: EvidenceSet, max_chars: int) -> EvidenceSet:
    """Drop the lowest-ranked chunks until the rendered evidence fits ``max_chars``."""
    items = list(evidence.items)
    while items and len(EvidenceSet(tuple(items), evidence.verses).render()) > max_chars:
        items.pop()
    return EvidenceSet(tuple(items), evidence.verses)


_REF = re.compile(r"(?<![\d:])(\d{1,3}):(\d{1,3})(?:-(\d{1,3}))?(?![\d:])")


def attach_verses(evidence: EvidenceSet, texts: Iterable[str], trace: ExecutionTrace | None = None) -> EvidenceSet:
    """Add verbatim ``[Qn]`` evidence for explicit surah:ayah references in ``texts``."""
    from .quran import QuranError, VerseRef, fetch_verses

    trace = trace if trace is not None else ExecutionTrace()
    verses = list(evidence.verses)
    seen = {v.title for v in verses}
    for text in texts:
        for m in _REF.finditer(text or ""):
            if len(verses) >= MAX_VERSE_REFS:
                break
            s, a = int(m.group(1)), int(m.group(2))
            try:
                fetch = fetch_verses(VerseRef(s, a, int(m.group(3)) if m.group(3) else a))
            except QuranError:
                continue
            if fetch.label in seen:
                continue
            seen.add(fetch.label)
            verses.append(
                VerseEvidence(
                    len(verses) + 1,
                    fetch.label,
                    fetch.url,
                    " ".join(r.ayah_text for r in fetch.records),
                    " ".join(r.translation for r in fetch.records),
                )
            )
    if len(verses) > len(evidence.verses):
        trace.add("verses", f"attached {len(verses) - len(evidence.verses)} verbatim verse reference(s)")
    return EvidenceSet(evidence.items, tuple(verses))


# --- grounded answering ----------------------------------------------------------------------

_SENTENCE = re.compile(r"(?<=[.!?؟])\s+")


def verify_tags(text: str, evidence: EvidenceSet, trace: ExecutionTrace | None = None) -> tuple[str, int]:
    """Remove sentences citing tags that are not in ``evidence``; returns (text, removed count)."""
    trace = trace if trace is not None else ExecutionTrace()
    cites, verses = evidence.cite_tags(), evidence.verse_tags()
    kept_lines = []
    removed = 0
    for line in text.splitlines():
        kept = []
        for sentence in _SENTENCE.split(line):
            bad = [f"[CITE:{n}]" for n in CITE_TAG.findall(sentence) if int(n) not in cites]
            bad += [f"[Q{n}]" for n in VERSE_TAG.findall(sentence) if int(n) not in verses]
            if bad:
                removed += 1
                trace.warn("verify", f"removed a sentence citing unknown tag(s) {', '.join(bad)}")
                continue
            kept.append(sentence)
        if kept or not line.strip():
            kept_lines.append(" ".join(kept))
    out = "\n".join(kept_lines).strip()
    return re.sub(r"\n{3,}", "\n\n", out), removed


@dataclass
class GroundedAnswer:
    text: str
    citations: list[Citation] = field(default_factory=list)
    abstained: bool = False
    removed_sentences: int = 0


def abstention(kind: str, lang: str) -> str:
    if kind == "fiqh":
        return ABSTAIN_FIQH_AR if lang == "ar" else ABSTAIN_FIQH_EN
    return ABSTAIN_GENERAL_AR if lang == "ar" else ABSTAIN_GENERAL_EN


def grounded_answer(
    kind: str,
    query: str,
    evidence: EvidenceSet,
    generator: TextGenerator,
    config: EngineConfig,
    trace: ExecutionTrace | None = None,
    lang: str = "en",
) -> GroundedAnswer:
    """Shared body of the fiqh and general answerers (``kind`` is "fiqh" or "general")."""
    trace = trace if trace is not None else ExecutionTrace()
    if not evidence:
        trace.add(kind, "no evidence; abstaining")
        return GroundedAnswer(abstention(kind, lang), [], True)
    if kind == "fiqh":
        template, temperature, max_tokens = prompts.FIQH_ANSWER, config.fiqh_temperature, config.fiqh_max_tokens
    else:
        template, temperature, max_tokens = prompts.GENERAL_ANSWER, config.general_temperature, 2048
    prompt = prompts.render(template, evidence=evidence.render(), question=query.strip())
    try:
        raw = generator.generate(prompt, temperature=temperature, max_tokens=max_tokens)
    except Exception as exc:
        trace.warn(kind, f"provider failed: {exc}; abstaining")
        return GroundedAnswer(abstention(kind, lang), [], True)
    text, removed = verify_tags(raw or "", evidence, trace)
    if not text:
        trace.warn(kind, "nothing left after verification; abstaining")
        return GroundedAnswer(abstention(kind, lang), [], True, removed)
    trace.add(kind, f"answer grounded in {len(evidence.items)} chunk(s) and {len(evidence.verses)} verse reference(s)")
    return GroundedAnswer(text, evidence.citations(), False, removed)


def answer_fiqh(query: str, evidence: EvidenceSet, generator: TextGenerator, config: EngineConfig, trace: ExecutionTrace | None = None, lang: str = "en") -> GroundedAnswer:
    trace = trace if trace is not None else ExecutionTrace()
    evidence = attach_verses(evidence, [query] + [i.chunk.text for i in evidence.items], trace)
    return grounded_answer("fiqh", query, evidence, generator, config, trace, lang)


def answer_general(query: str, evidence: EvidenceSet, generator: TextGenerator, config: EngineConfig, trace: ExecutionTrace | None = None, lang: str = "en") -> GroundedAnswer:
    trace = trace if trace is not None else ExecutionTrace()
    fitted = fit_budget(evidence, config.general_context_chars)
    if len(fitted.items) < len(evidence.items):
        trace.add("general", f"context budget {config.general_context_chars} chars: kept {len(fitted.items)} of {len(evidence.items)} chunks")
    return grounded_answer("general", query, fitted, generator, config, trace, lang)
