"""Greeting tool: short culturally appropriate replies in the query's language."""

from __future__ import annotations

import re

from . import prompts
from .config import EngineConfig
from .core import ExecutionTrace
from .providers import TextGenerator
from .text import arabic_ratio, detect_language

FALLBACK_AR = "وعليكم السلام ورحمة الله وبركاته. كيف يمكنني مساعدتك؟"
FALLBACK_EN = "Wa alaikum assalam wa rahmatullahi wa barakatuh. How can I help you with your Islamic questions today?"

_SENTENCE_END = re.compile(r"[.!?؟](?=\s|$)")


def first_sentences(text: str, limit: int = 2) -> str:
    """Truncate ``text`` after its ``limit``-th sentence terminator."""
    text = " ".join(text.split())
    ends = [m.end() for m in _SENTENCE_END.finditer(text)]
    if len(ends) > limit:
        text = text[: ends[limit - 1]]
    return text.strip()


def greet(query: str, generator: TextGenerator, config: EngineConfig, trace: ExecutionTrace | None = None) -> tuple[str, str]:
    """(reply, language). Never raises: provider failure yields the fixed reply."""
    trace = trace if trace is not None else ExecutionTrace()
    if arabic_ratio(query or "") is None:
        trace.add("greeting", "blank query; language defaults to en")
        return FALLBACK_EN, "en"
    lang = detect_language(query)
    prompt = prompts.render(prompts.GREETING, question=query.strip(), language=lang)
    try:
        reply = first_sentences(
            generator.generate(prompt, temperature=config.greeting_temperature, max_tokens=config.greeting_max_tokens)
        )
    except Exception as exc:
        trace.warn("greeting", f"provider failed: {exc}; fixed reply used")
        reply = ""
    if not reply:
        reply = FALLBACK_AR if lang == "ar" else FALLBACK_EN
    trace.add("greeting", f"reply language {lang}")
    return reply, lang
