"""Nine-intent hybrid query router.

A provider-backed classifier answers first. When its output is malformed, its
confidence is below 0.5, or the call fails, a prototype classifier takes over:
the query embedding is compared with cached exemplar embeddings per
(intent, language) class and the confidence comes from the margin between the
two best classes.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from . import prompts
from .core import ExecutionTrace
from .providers import Embedder, TextGenerator
from .text import detect_language

logger = logging.getLogger(__name__)

PRIMARY_MIN_CONFIDENCE = 0.5


class IntentLabel(str, Enum):
    FIQH_RULING = "fiqh_ruling"
    QURAN_RETRIEVAL = "quran_retrieval"
    GENERAL_ISLAMIC = "general_islamic"
    GREETING = "greeting"
    ZAKAT_CALCULATION = "zakat_calculation"
    INHERITANCE_CALCULATION = "inheritance_calculation"
    DUA_LOOKUP = "dua_lookup"
    ISLAMIC_CALENDAR = "islamic_calendar"
    PRAYER_TIMES = "prayer_times"

    @classmethod
    def parse(cls, value: str) -> "IntentLabel":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown intent label {value!r}") from None


INTENT_ORDER = {label: i for i, label in enumerate(IntentLabel)}
LANG_ORDER = {"ar": 0, "en": 1}

RETRIEVAL_INTENTS = frozenset(
    {IntentLabel.FIQH_RULING, IntentLabel.QURAN_RETRIEVAL, IntentLabel.GENERAL_ISLAMIC, IntentLabel.DUA_LOOKUP}
)


class Route(str, Enum):
    TOOL = "tool"
    CALCULATION = "calculation"
    RETRIEVAL = "retrieval"
    QURAN = "quran"


_ROUTES = {
    IntentLabel.GREETING: Route.TOOL,
    IntentLabel.ISLAMIC_CALENDAR: Route.TOOL,
    IntentLabel.PRAYER_TIMES: Route.TOOL,
    IntentLabel.DUA_LOOKUP: Route.TOOL,
    IntentLabel.ZAKAT_CALCULATION: Route.CALCULATION,
    IntentLabel.INHERITANCE_CALCULATION: Route.CALCULATION,
    IntentLabel.FIQH_RULING: Route.RETRIEVAL,
    IntentLabel.GENERAL_ISLAMIC: Route.RETRIEVAL,
    IntentLabel.QURAN_RETRIEVAL: Route.QURAN,
}


def route(decision: "RouterDecision | IntentLabel") -> Route:
    intent = decision.intent if isinstance(decision, RouterDecision) else decision
    return _ROUTES[IntentLabel(intent)]


@dataclass(frozen=True)
class RouterDecision:
    intent: IntentLabel
    language: str
    confidence: float
    reasoning: str = ""
    subquestions: tuple[str, ...] = ()
    requires_retrieval: bool = False
    origin: str = "primary"

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if self.language not in LANG_ORDER:
            raise ValueError(f"language must be 'ar' or 'en', got {self.language!r}")

    def to_dict(self) -> dict:
        return {
            "intent": self.intent.value,
            "language": self.language,
            "confidence": self.confidence,
            "reasoning": self.reasoning,
            "subquestions": list(self.subquestions),
            "requires_retrieval": self.requires_retrieval,
            "origin": self.origin,
            "route": route(self).value,
        }


# --- primary classifier output parsing -----------------------------------------------

_THINK = re.compile(r"<think>.*?</think>", re.S | re.I)
_FENCE = re.compile(r"```(?:json|JSON)?\s*(.*?)```", re.S)


class MalformedOutput(ValueError):
    pass


def _first_json_object(text: str) -> dict:
    decoder = json.JSONDecoder()
    for m in re.finditer(r"\{", text):
        try:
            obj, _end = decoder.raw_decode(text, m.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise MalformedOutput("no JSON object found")


def _decode(raw: str, query: str = "") -> RouterDecision:
    text = _THINK.sub("", raw or "").replace("﻿", "").strip()
    fenced = _FENCE.search(text)
    if fenced:
        text = fenced.group(1)
    obj = _first_json_object(text)

    label = obj.get("question_type", obj.get("intent"))
    if not isinstance(label, str):
        raise MalformedOutput("missing question_type")
    try:
        intent = IntentLabel(label.strip())
    except ValueError:
        raise MalformedOutput(f"label {label!r} outside the closed set") from None

    conf = obj.get("confidence")
    if isinstance(conf, bool) or not isinstance(conf, (int, float)):
        raise MalformedOutput("confidence is not a number")
    conf = float(conf)
    if not 0.0 <= conf <= 1.0:
        raise MalformedOutput(f"confidence {conf} outside [0, 1]")

    lang = obj.get("language", detect_language(query) if query else "en")
    if lang not in LANG_ORDER:
        raise MalformedOutput(f"language {lang!r} not ar/en")

    reasoning = obj.get("reasoning", "")
    if not isinstance(reasoning, str):
        raise MalformedOutput("reasoning is not a string")
    subq = obj.get("subquestions", [])
    if subq is None:
        subq = []
    if not isinstance(subq, list) or not all(isinstance(s, str) for s in subq):
        raise MalformedOutput("subquestions is not a list of strings")
    needs = obj.get("requires_retrieval", intent in RETRIEVAL_INTENTS)
    if not isinstance(needs, bool):
        raise MalformedOutput("requires_retrieval is not a boolean")
    return RouterDecision(intent, lang, conf, reasoning, tuple(subq), needs, "primary")


def parse_classifier_json(raw: str, query: str = "") -> RouterDecision | None:
    """Decision from raw provider output, or None when the output is malformed."""
    try:
        return _decode(raw, query)
    except MalformedOutput as exc:
        logger.debug("malformed classifier output: %s", exc)
        return None


# --- prototype fallback ----------------------------------------------------------------


@dataclass(frozen=True)
class IntentPrototype:
    intent: str
    language: str
    exemplar_text: str


def margin_confidence(sim1: float, sim2: float) -> float:
    """(sim1 - sim2) / 2 + 0.5, clamped to [0, 1]."""
    return min(1.0, max(0.0, (sim1 - sim2) / 2.0 + 0.5))


def load_prototypes(path: str | Path | None = None) -> list[IntentPrototype]:
    """Read ``intent<TAB>language<TAB>exemplar_text`` records (``#`` lines are comments)."""
    if path is None:
        text = resources.files("deenkit.data").joinpath("prototypes.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    out = []
    rows = csv.reader((ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), delimiter="\t")
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"prototype record needs 3 fields, got {row!r}")
        out.append(IntentPrototype(row[0].strip(), row[1].strip(), row[2].strip()))
    return out


@dataclass
class PrototypeIndex:
    """Exemplar embeddings grouped into (label, language) classes.

    Labels are plain strings so the same machinery serves the router intents and
    the Quran subtypes. ``label_order`` fixes tie-breaking.
    """

    embedder: Embedder
    prototypes: list[IntentPrototype]
    label_order: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.prototypes:
            raise ValueError("prototype set is empty")
        self.classes: list[tuple[str, str]] = sorted(
            {(p.intent, p.language) for p in self.prototypes},
            key=lambda c: (self.label_order.get(c[0], len(self.label_order)), c[0], LANG_ORDER.get(c[1], 9)),
        )
        index = {c: i for i, c in enumerate(self.classes)}
        self._owner = np.array([index[(p.intent, p.language)] for p in self.prototypes])
        self.matrix = np.vstack([self.embedder.embed(p.exemplar_text) for p in self.prototypes])

    def class_scores(self, vec: np.ndarray) -> np.ndarray:
        sims = self.matrix @ vec
        scores = np.full(len(self.classes), -np.inf)
        np.maximum.at(scores, self._owner, sims)
        return scores

    def nearest(self, vec: np.ndarray) -> tuple[tuple[str, str], float, float, str]:
        """(best class, sim1, sim2, nearest exemplar text)."""
        scores = self.class_scores(vec)
        # stable argsort keeps enumeration order among ties
        order = np.argsort(-scores, kind="stable")
        best = int(order[0])
        sim1 = float(scores[best])
        sim2 = float(scores[order[1]]) if len(order) > 1 else sim1
        sims = self.matrix @ vec
        members = np.flatnonzero(self._owner == best)
        exemplar = self.prototypes[int(members[np.argmax(sims[members])])].exemplar_text
        return self.classes[best], sim1, sim2, exemplar


class Router:
    """Primary provider classifier with prototype fallback."""

    def __init__(self, generator: TextGenerator, embedder: Embedder, prototypes: Iterable[IntentPrototype] | None = None):
        self.generator = generator
        self.embedder = embedder
        protos = list(prototypes) if prototypes is not None else load_prototypes()
        protos = [p for p in protos if p.intent in IntentLabel._value2member_map_]
        self.index = PrototypeIndex(embedder, protos, {lab.value: i for i, lab in enumerate(IntentLabel)})

    def classify(self, query: str, trace: ExecutionTrace | None = None) -> RouterDecision:
        query = (query or "").strip()
        if not query:
            raise ValueError("query is empty")
        trace = trace if trace is not None else ExecutionTrace()
        prompt = prompts.render(prompts.ROUTER, question=query)
        try:
            raw = self.generator.generate(prompt, temperature=0.0, max_tokens=300)
        except Exception as exc:
            trace.warn("classify", f"primary classifier failed: {exc}")
            return self.fallback_classify(query, trace)
        try:
            decision = _decode(raw, query)
        except MalformedOutput as exc:
            trace.warn("classify", f"primary output malformed: {exc}")
            return self.fallback_classify(query, trace)
        if decision.confidence < PRIMARY_MIN_CONFIDENCE:
            trace.add("classify", f"primary confidence {decision.confidence:.2f} below {PRIMARY_MIN_CONFIDENCE}; using fallback")
            return self.fallback_classify(query, trace)
        trace.add("classify", f"primary: {decision.intent.value} ({decision.confidence:.2f})")
        return decision

    def fallback_classify(self, query: str, trace: ExecutionTrace | None = None) -> RouterDecision:
        trace = trace if trace is not None else ExecutionTrace()
        lang = detect_language(query)
        try:
            vec = self.embedder.embed(query)
        except Exception as exc:
            trace.warn("classify", f"embedder failed: {exc}; default decision")
            return RouterDecision(
                IntentLabel.GENERAL_ISLAMIC, lang, 0.5, "embedder unavailable; default route", (query,), True, "fallback"
            )
        (label, _plang), sim1, sim2, exemplar = self.index.nearest(vec)
        intent = IntentLabel(label)
        conf = margin_confidence(sim1, sim2)
        decision = RouterDecision(
            intent,
            lang,
            conf,
            f"nearest prototype: {exemplar!r} (sim {sim1:.3f}, runner-up {sim2:.3f})",
            (query,),
            intent in RETRIEVAL_INTENTS,
            "fallback",
        )
        trace.add("classify", f"fallback: {intent.value} ({conf:.2f})")
        return decision


# --- evaluation --------------------------------------------------------------------------


def evaluate_router(classify, records: Iterable[dict]) -> dict:
    """Accuracy, per-intent recall and a confusion table for labelled ``{query, intent}`` records.

    ``classify`` maps a query to a ``RouterDecision`` (for example ``Router.classify``
    or ``Router.fallback_classify``).
    """
    labels = [lab.value for lab in IntentLabel]
    confusion = {gold: {pred: 0 for pred in labels} for gold in labels}
    rows = []
    for rec in records:
        gold = IntentLabel.parse(rec["intent"]).value
        pred = classify(rec["query"]).intent.value
        confusion[gold][pred] += 1
        rows.append({"query": rec["query"], "gold": gold, "predicted": pred, "correct": gold == pred})
    if not rows:
        raise ValueError("no labelled queries")
    correct = sum(r["correct"] for r in rows)
    recall = {}
    for gold in labels:
        n = sum(confusion[gold].values())
        if n:
            recall[gold] = confusion[gold][gold] / n
    return {
        "total": len(rows),
        "correct": correct,
        "accuracy": correct / len(rows),
        "per_intent_recall": recall,
        "confusion": {g: {p: c for p, c in row.items() if c} for g, row in confusion.items() if any(row.values())},
        "errors": [r for r in rows if not r["correct"]],
    }
