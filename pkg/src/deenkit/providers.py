"""Pluggable text-generation and embedding providers.

Engine code only depends on the two small protocols below. The stub
implementations are deterministic and need no network, so the whole pipeline
can run offline; the HTTP implementations talk to an OpenAI-compatible API.
"""

from __future__ import annotations

import json
import re
import zlib
from typing import Protocol, runtime_checkable

import numpy as np

from . import _kernels
from . import prompts
from .text import content_words, detect_language, normalize

STUB_DIM = 256


class ProviderError(RuntimeError):
    """A provider call failed (network, HTTP status, malformed payload)."""


@runtime_checkable
class TextGenerator(Protocol):
    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> str: ...


@runtime_checkable
class Embedder(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def embed_many(embedder: Embedder, texts: list[str]) -> np.ndarray:
    batch = getattr(embedder, "embed_batch", None)
    if batch is not None:
        return batch(texts)
    if not texts:
        return np.zeros((0, embedder.dim))
    return np.vstack([embedder.embed(t) for t in texts])


class TrigramEmbedder:
    """Character-trigram hashing into ``dim`` buckets, L2-normalised.

    Text is normalised first (casefold, Arabic diacritics removed, letter forms
    folded) and padded with one space at each end. The all-zero vector is
    returned for text shorter than one trigram.
    """

    def __init__(self, dim: int = STUB_DIM):
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        codes = _kernels.text_codes(f" {normalize(text)} ")
        vec = _kernels.trigram_counts(codes, self.dim)
        norm = float(np.sqrt(vec @ vec))
        return vec / norm if norm > 0 else vec

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, t in enumerate(texts):
            out[i] = self.embed(t)
        return out


# --- stub text generator ---------------------------------------------------------

# (intent, regex) checked in order; first hit wins
_ROUTER_RULES: list[tuple[str, re.Pattern[str]]] = [
    ("greeting", re.compile(r"^\W*(hi|hello|hey|salam|salaam|assalamu?\s*alaikum|as-?salamu|thanks?( you)?|jazak\w*|السلام عليكم|مرحبا|شكرا|جزاك)\W*(\w+\W*){0,3}$")),
    ("zakat_calculation", re.compile(r"zakat|zakah|nisab|زكا|نصاب")),
    ("inheritance_calculation", re.compile(r"inherit|estate|heirs?\b|faraid|mirath|ميراث|ورث|تركة|الورثة")),
    ("prayer_times", re.compile(r"prayer times?|\bfajr\b|\bdhuhr\b|\bzuhr\b|\basr\b|\bmaghrib\b|\bisha\b|qibla|salah time|اوقات الصلاة|أوقات الصلاة|صلاة الفجر|صلاه الفجر|القبلة|القبله|الفجر|المغرب|العشاء")),
    ("islamic_calendar", re.compile(r"hijri|ramadan|\beid\b|muharram|ashura|calendar|islamic date|هجري|الهجري|رمضان|العيد|عيد|محرم|عاشوراء")),
    ("dua_lookup", re.compile(r"\bdua\b|\bduas\b|du'a|adhkar|supplication|what (to|should i) say|دعاء|أذكار|اذكار")),
    ("quran_retrieval", re.compile(r"\d+\s*:\s*\d+|\bsurah\b|\bsura\b|\bayah\b|\bayat\b|verse|quran|qur'an|سورة|سوره|آية|الآية|ايه|اية|القرآن")),
    ("fiqh_ruling", re.compile(r"halal|haram|ruling|permissible|allowed|forbidden|makruh|fatwa|obligatory|invalidat|breaks? (the |my )?(fast|wudu|prayer)|can i |is it (ok|okay|allowed)|حكم|حلال|حرام|يجوز")),
    ("general_islamic", re.compile(r"who was|what is|pillars|prophet|companion|meaning of|history|تعريف|من هو|ما هي|ما معنى|أركان")),
]

_SUBTYPE_RULES: list[tuple[str, re.Pattern[str]]] = [
    ("statistics", re.compile(r"how many|count|number of|most verses|fewest|least|longest|shortest|makki|madani|meccan|medinan|كم عدد|كم|مكية|مدنية")),
    ("interpretation", re.compile(r"meaning|tafsir|tafseer|explain|interpret|what does the quran say about|معنى|تفسير|اشرح")),
    ("full_surah", re.compile(r"(entire|whole|full|complete) surah|(write|read|recite|show) (me )?(the )?surah|give me (the )?(entire |whole )?surah|اكتب سورة|سورة كاملة")),
    ("specific_verse", re.compile(r"\d+\s*:\s*\d+|verse|ayah|آية|الآية|اية")),
]


def _stems(text: str) -> set[str]:
    return {re.sub(r"(?:ing|ed|es|s)$", "", w) or w for w in content_words(text)}


def _question(prompt: str) -> str:
    m = re.search(r"Question:\s*(.*?)\s*(?:\n\s*\n|\nSub-type:|$)", prompt, re.S)
    if not m:
        m = re.search(r"(?:User's question|سؤال المستخدم):\s*(.*?)\n", prompt, re.S)
    return m.group(1).strip() if m else ""


class StubTextGenerator:
    """Deterministic canned responses keyed by prompt kind.

    The router prompt gets a keyword-rule JSON verdict (or prose when nothing
    matches, which exercises the fallback classifier); answer prompts get a
    template that cites the first evidence tags it was given.
    """

    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> str:
        handler = getattr(self, "_" + prompts.handler_of(prompts.kind_of(prompt)), None)
        if handler is None:
            return "I cannot help with that."
        return handler(prompt)

    def _router(self, prompt: str) -> str:
        q = _question(prompt)
        low = q.casefold()
        for intent, pattern in _ROUTER_RULES:
            if pattern.search(low):
                return json.dumps(
                    {
                        "question_type": intent,
                        "language": detect_language(q),
                        "confidence": 0.9,
                        "reasoning": f"keyword rule for {intent}",
                        "subquestions": [q],
                        "requires_retrieval": intent in ("fiqh_ruling", "quran_retrieval", "general_islamic", "dua_lookup"),
                    },
                    ensure_ascii=False,
                )
        return "I am not sure how to classify this question."

    def _quran_subtype(self, prompt: str) -> str:
        low = _question(prompt).casefold()
        for label, pattern in _SUBTYPE_RULES:
            if pattern.search(low):
                return label
        return "unknown"

    def _dua_selector(self, prompt: str) -> str:
        question = _question(prompt)
        words = _stems(question)
        best: list[int] = []
        best_overlap = 0
        for m in re.finditer(r"^(\d+)\.\s*(.+)$", prompt, re.M):
            overlap = len(words & _stems(m.group(2)))
            if overlap > best_overlap:
                best, best_overlap = [int(m.group(1))], overlap
            elif overlap == best_overlap and overlap > 0:
                best.append(int(m.group(1)))
        return ",".join(map(str, best)) if best else "none"

    def _greeting(self, prompt: str) -> str:
        if "Language: ar" in prompt:
            return "وعليكم السلام ورحمة الله وبركاته. كيف يمكنني مساعدتك اليوم؟"
        return "Wa alaikum assalam wa rahmatullahi wa barakatuh! How can I help you with your Islamic questions today?"

    def _answer(self, prompt: str) -> str:
        lines = re.findall(r"^(\[(?:CITE:\d+|Q\d+)\])\s*(?:(.*?)\s::\s)?(.*)$", prompt, re.M)
        if not lines:
            return "I could not find enough evidence to answer."
        cites = [line for line in lines if line[0].startswith("[CITE")][:3]
        verses = [line for line in lines if line[0].startswith("[Q")][:1]
        parts = []
        for tag, _title, body in cites + verses:
            sentence = re.split(r"(?<=[.!?؟])\s", body.strip(), maxsplit=1)[0][:240].rstrip()
            parts.append(f"{sentence} {tag}")
        if detect_language(_question(prompt)) == "ar":
            head, ev, tail = "النطاق: يقتصر هذا الملخص على المصادر المسترجعة ويفترض الظروف المعتادة.", "الأدلة: ", "الحكم: استشر عالمًا مؤهلًا في حالتك الخاصة."
        else:
            head = "Scope: this summary covers only the retrieved sources and assumes ordinary circumstances."
            ev, tail = "Evidence: ", "Ruling: consult a qualified scholar for your specific case."
        if "ANSWER_KIND: fiqh" in prompt:
            return head + "\n" + ev + " ".join(parts) + "\n" + tail
        return " ".join(parts)

    def _location(self, prompt: str) -> str:
        return "none"

    def _extract(self, prompt: str) -> str:
        return "none"


class FailingTextGenerator:
    """Always raises; used to exercise deterministic fallbacks."""

    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> str:
        raise ProviderError("provider unavailable")


class ScriptedTextGenerator:
    """Returns fixed outputs per prompt kind; unknown kinds fall through to ``default``."""

    def __init__(self, outputs: dict[str, str], default: TextGenerator | None = None):
        self.outputs = outputs
        self.default = default or StubTextGenerator()
        self.calls: list[tuple[str, float, int]] = []

    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> str:
        kind = prompts.kind_of(prompt)
        self.calls.append((kind, temperature, max_tokens))
        if kind in self.outputs:
            out = self.outputs[kind]
            if isinstance(out, Exception):
                raise out
            return out
        return self.default.generate(prompt, temperature, max_tokens)


# --- HTTP providers --------------------------------------------------------------


class HttpTextGenerator:
    """OpenAI-compatible ``/chat/completions`` client with bearer-token auth."""

    def __init__(self, base_url: str, model: str, api_key: str = "", timeout: float = 60.0, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model = model
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        try:
            resp = self._client.post(f"{self.base_url}/chat/completions", json=payload)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:  # network, HTTP status, shape
            raise ProviderError(f"text generation failed: {exc}") from exc


class HttpEmbedder:
    """OpenAI-compatible ``/embeddings`` client; vectors are re-normalised to unit length."""

    def __init__(self, base_url: str, model: str, dim: int, api_key: str = "", timeout: float = 60.0, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model = model
        self.dim = dim
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    def embed(self, text: str) -> np.ndarray:
        try:
            resp = self._client.post(f"{self.base_url}/embeddings", json={"model": self.model, "input": text})
            resp.raise_for_status()
            vec = np.asarray(resp.json()["data"][0]["embedding"], dtype=np.float64)
        except Exception as exc:
            raise ProviderError(f"embedding failed: {exc}") from exc
        if vec.shape != (self.dim,):
            raise ProviderError(f"embedding has shape {vec.shape}, expected ({self.dim},)")
        norm = float(np.linalg.norm(vec))
        return vec / norm if norm > 0 else vec


def stable_hash(text: str) -> int:
    """Process-independent 32-bit hash (Python's ``hash`` is salted)."""
    return zlib.crc32(text.encode("utf-8"))
