"""Two-stage dua lookup: occasion similarity, then a provider selector.

Entries are returned exactly as stored. When nothing matches the user gets a
fixed fallback message; a dua is never generated.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import prompts
from .config import EngineConfig
from .core import Citation, ExecutionTrace, ValidationError
from .providers import Embedder, TextGenerator, embed_many
from .text import detect_language

FALLBACK_EN = (
    "I could not find a dua in my collection for that occasion. "
    "Please check an authenticated collection such as Hisn al-Muslim, or ask a knowledgeable person."
)
FALLBACK_AR = "لم أجد دعاءً مناسبًا لهذه المناسبة في مجموعتي. يرجى مراجعة كتاب موثوق مثل حصن المسلم أو سؤال أهل العلم."


@dataclass(frozen=True)
class DuaEntry:
    page_title: str
    occasion: str
    arabic: str
    translation: str
    reference_url: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "page_title": self.page_title,
            "occasion": self.occasion,
            "arabic": self.arabic,
            "translation": self.translation,
            "reference_url": self.reference_url,
        }


def load_duas(path: str | Path | None = None) -> list[DuaEntry]:
    path = Path(path) if path else Path(str(resources.files("deenkit.data").joinpath("duas.jsonl")))
    entries = []
    seen: set[str] = set()
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        try:
            entry = DuaEntry(rec["page_title"], rec["occasion"], rec["arabic"], rec["translation"], rec["reference_url"])
        except KeyError as exc:
            raise ValidationError(f"line {n}: missing field {exc.args[0]}") from None
        if entry.page_title in seen:
            raise ValidationError(f"line {n}: duplicate page_title {entry.page_title!r}")
        seen.add(entry.page_title)
        entries.append(entry)
    return entries


@dataclass
class DuaResult:
    entry: DuaEntry | None
    text: str
    stage: str
    candidates: tuple[tuple[str, float], ...] = ()

    @property
    def citations(self) -> list[Citation]:
        if self.entry is None:
            return []
        return [Citation(1, f"Dua: {self.entry.occasion}", self.entry.reference_url)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "entry": self.entry.to_dict() if self.entry else None,
            "stage": self.stage,
            "candidates": [{"page_title": t, "similarity": round(s, 6)} for t, s in self.candidates],
        }


def render_entry(entry: DuaEntry) -> str:
    return f"{entry.arabic}\n{entry.translation} [CITE:1]"


_INDICES = re.compile(r"^\s*(\d+(?:\s*,\s*\d+)*)\s*\.?\s*$")


class DuaStore:
    """Dua entries with precomputed occasion embeddings (read-only after construction)."""

    def __init__(self, entries: list[DuaEntry], embedder: Embedder):
        if not entries:
            raise ValidationError("dua store is empty")
        self.entries = tuple(entries)
        self.by_title = {e.page_title: e for e in self.entries}
        self.embedder = embedder
        self.matrix = embed_many(embedder, [e.occasion for e in self.entries])
        self.matrix.setflags(write=False)

    def candidates(self, query: str, top_k: int = 5, min_similarity: float = 0.2) -> list[tuple[DuaEntry, float]]:
        sims = self.matrix @ self.embedder.embed(query)
        order = np.argsort(-sims, kind="stable")[:top_k]
        return [(self.entries[i], float(sims[i])) for i in order if sims[i] >= min_similarity]

    def lookup(
        self,
        query: str,
        generator: TextGenerator,
        config: EngineConfig | None = None,
        trace: ExecutionTrace | None = None,
    ) -> DuaResult:
        config = config or EngineConfig()
        trace = trace if trace is not None else ExecutionTrace()
        lang = detect_language(query)
        fallback = FALLBACK_AR if lang == "ar" else FALLBACK_EN
        cands = self.candidates(query, config.dua_top_k, config.dua_min_similarity)
        listed = tuple((e.page_title, s) for e, s in cands)
        trace.add("dua", f"stage 1: {len(cands)} occasion(s) at or above {config.dua_min_similarity}")
        if not cands:
            return DuaResult(None, fallback, "no_candidates", listed)

        prompt = prompts.dua_prompt(query, [e.occasion for e, _s in cands], lang)
        try:
            raw = generator.generate(prompt, temperature=0.0, max_tokens=20).strip()
        except Exception as exc:
            trace.warn("dua", f"selector failed: {exc}; using the top stage-1 candidate")
            return DuaResult(cands[0][0], render_entry(cands[0][0]), "stage1_degraded", listed)
        if raw.strip(" .\"'").lower() == "none":
            trace.add("dua", "selector answered none")
            return DuaResult(None, fallback, "selector_none", listed)
        m = _INDICES.match(raw)
        picks = [int(x) for x in m.group(1).split(",")] if m else []
        valid = [i for i in picks if 1 <= i <= len(cands)]
        if not valid:
            trace.warn("dua", f"selector output {raw[:40]!r} is not a candidate list; using the top stage-1 candidate")
            return DuaResult(cands[0][0], render_entry(cands[0][0]), "stage1_degraded", listed)
        entry = self.by_title[cands[valid[0] - 1][0].page_title]
        trace.add("dua", f"stage 2: selected {entry.page_title}")
        return DuaResult(entry, render_entry(entry), "selected", listed)
