"""Shared response types: citations, execution traces and the final assembled answer."""

from __future__ import annotations

import itertools
import re
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

CITE_TAG = re.compile(r"\[CITE:(\d+)\]")
VERSE_TAG = re.compile(r"\[Q(\d+)\]")


class AssemblyError(ValueError):
    pass


class ValidationError(ValueError):
    """Bad user input (maps to exit code 2 / HTTP 4xx)."""


@dataclass(frozen=True)
class Citation:
    """One entry of the References block.

    ``kind`` is ``"cite"`` for retrieved evidence (rendered ``[CITE:n]``) or
    ``"quran"`` for verse-level citations (rendered ``[Qn]``). The two kinds are
    numbered independently.
    """

    tag: int
    source_title: str
    source_url: str | None = None
    span: str | None = None
    kind: str = "cite"

    @property
    def label(self) -> str:
        return f"[Q{self.tag}]" if self.kind == "quran" else f"[CITE:{self.tag}]"

    def to_dict(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "label": self.label,
            "kind": self.kind,
            "source_title": self.source_title,
            "source_url": self.source_url,
            "span": self.span,
        }


def normalize_citations(raw: Iterable[Any]) -> list[Citation]:
    """Collapse duplicate (title, url) sources and renumber from 1 in first-seen order.

    Accepts ``Citation`` objects, mappings with ``source_title``/``title`` and
    ``source_url``/``url`` keys, or ``(title, url)`` tuples. Numbering restarts
    for each citation kind.
    """
    seen: set[tuple[str, str, str | None]] = set()
    counters: dict[str, int] = {}
    out: list[Citation] = []
    for rec in raw:
        if isinstance(rec, Citation):
            title, url, span, kind = rec.source_title, rec.source_url, rec.span, rec.kind
        elif isinstance(rec, Mapping):
            title = rec.get("source_title", rec.get("title"))
            url = rec.get("source_url", rec.get("url"))
            span = rec.get("span")
            kind = rec.get("kind", "cite")
        else:
            title, url = rec[0], rec[1] if len(rec) > 1 else None
            span, kind = None, "cite"
        if not title:
            raise ValueError("citation record without a title")
        key = (kind, title, url)
        if key in seen:
            continue
        seen.add(key)
        counters[kind] = counters.get(kind, 0) + 1
        out.append(Citation(counters[kind], title, url, span, kind))
    return out


@dataclass(frozen=True)
class TraceEvent:
    stage: str
    timestamp: float
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"stage": self.stage, "timestamp": self.timestamp, "detail": self.detail}


class StepClock:
    """Deterministic clock: each reading advances by one millisecond from zero.

    Used under stub providers so repeated requests produce byte-identical traces.
    """

    def __init__(self) -> None:
        self._ticks = itertools.count()

    def __call__(self) -> float:
        return next(self._ticks) / 1000.0


@dataclass
class ExecutionTrace:
    """Ordered (stage, timestamp, detail) log owned by a single request."""

    request_id: str = ""
    clock: Callable[[], float] = field(default=time.time, repr=False)
    events: list[TraceEvent] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def add(self, stage: str, detail: str = "") -> None:
        ts = self.clock()
        if self.events and ts < self.events[-1].timestamp:
            ts = self.events[-1].timestamp
        self.events.append(TraceEvent(stage, ts, detail))

    def warn(self, stage: str, detail: str) -> None:
        self.warnings.append(f"{stage}: {detail}")
        self.add(stage, "warning: " + detail)

    def __len__(self) -> int:
        return len(self.events)

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "events": [e.to_dict() for e in self.events],
            "warnings": list(self.warnings),
        }


@dataclass
class AssembledResponse:
    answer: str
    references: list[Citation]
    trace: ExecutionTrace
    route: str
    tool_metadata: dict[str, Any] = field(default_factory=dict)

    def render(self) -> str:
        """Answer followed by a References block."""
        if not self.references:
            return self.answer
        lines = [self.answer, "", "References:"]
        for c in self.references:
            entry = f"{c.label} {c.source_title}"
            if c.source_url:
                entry += f" ({c.source_url})"
            lines.append(entry)
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.trace.request_id,
            "route": self.route,
            "answer": self.answer,
            "references": [c.to_dict() for c in self.references],
            "rendered": self.render(),
            "tool_metadata": self.tool_metadata,
            "trace": self.trace.to_dict(),
        }


def referenced_tags(text: str) -> tuple[set[int], set[int]]:
    """(CITE numbers, Q numbers) appearing in ``text``."""
    return {int(m) for m in CITE_TAG.findall(text)}, {int(m) for m in VERSE_TAG.findall(text)}


def assemble_response(
    answer: str,
    citations: list[Citation],
    trace: ExecutionTrace,
    route: str,
    tool_metadata: dict[str, Any] | None = None,
) -> AssembledResponse:
    if not answer or not answer.strip():
        raise AssemblyError("empty answer")
    cites, verses = referenced_tags(answer)
    have_cite = {c.tag for c in citations if c.kind == "cite"}
    have_q = {c.tag for c in citations if c.kind == "quran"}
    dangling = sorted(f"[CITE:{n}]" for n in cites - have_cite) + sorted(f"[Q{n}]" for n in verses - have_q)
    if dangling:
        raise AssemblyError(f"dangling citation tag: {', '.join(dangling)}")
    trace.add("assemble", f"{len(citations)} reference(s)")
    return AssembledResponse(answer, list(citations), trace, route, dict(tool_metadata or {}))

