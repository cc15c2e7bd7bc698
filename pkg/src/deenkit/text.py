"""Arabic/English text helpers shared by the routing, Quran and retrieval modules."""

from __future__ import annotations

import re
import unicodedata

# harakat, Quranic annotation marks, superscript alef, tatweel
_DIACRITICS = re.compile("[\u0610-\u061a\u064b-\u065f\u0670\u06d6-\u06ed\u0640]")
_ALEF = str.maketrans({"ٱ": "ا", "أ": "ا", "إ": "ا", "آ": "ا"})
_FOLD = str.maketrans({"ى": "ي", "ة": "ه", "ؤ": "و", "ئ": "ي"})
_DIGITS = str.maketrans("٠١٢٣٤٥٦٧٨٩۰۱۲۳۴۵۶۷۸۹", "01234567890123456789")
_PUNCT = re.compile(r"[^\w\s]+", re.UNICODE)
_SPACES = re.compile(r"\s+")


def strip_diacritics(text: str) -> str:
    """Remove harakat and Quranic marks and unify alef forms (SimpleText column)."""
    return _SPACES.sub(" ", _DIACRITICS.sub("", text).translate(_ALEF)).strip()


def ascii_digits(text: str) -> str:
    return text.translate(_DIGITS)


def normalize(text: str) -> str:
    """Aggressive matching form: casefolded, no diacritics, folded letters, no punctuation."""
    text = unicodedata.normalize("NFKC", text)
    text = strip_diacritics(ascii_digits(text)).translate(_FOLD).casefold()
    text = _PUNCT.sub(" ", text.replace("_", " "))
    return _SPACES.sub(" ", text).strip()


def is_arabic_char(ch: str) -> bool:
    return "\u0600" <= ch <= "\u06ff"


def arabic_ratio(text: str) -> float | None:
    """Share of non-whitespace characters in U+0600..U+06FF; None for blank text."""
    chars = [c for c in text if not c.isspace()]
    if not chars:
        return None
    return sum(1 for c in chars if is_arabic_char(c)) / len(chars)


def detect_language(text: str) -> str:
    """``"ar"`` when more than 30% of the non-whitespace characters are Arabic."""
    ratio = arabic_ratio(text)
    return "ar" if ratio is not None and ratio > 0.30 else "en"


_WORD = re.compile(r"[\w']+", re.UNICODE)
STOPWORDS = frozenset(
    """a an the of for to in on at by and or is are was be what which who how when where why do does
    i me my we our you your it its this that with from about please tell give show can could should
    would dua duas supplication say said before after""".split()
) | frozenset("في من على عن الى إلى ما هو هي هل كيف متى اين أين لماذا دعاء ماذا".split())


def content_words(text: str) -> set[str]:
    return {w for w in _WORD.findall(normalize(text)) if len(w) > 2 and w not in STOPWORDS}


RETRIEVAL_STOPWORDS = STOPWORDS | frozenset(
    """there their they them those these has have had not but all any one also may must then than into upon
    him his her she he will shall if as so no nor such other some more most only own same very just
    permissible allowed islam islamic muslim muslims""".split()
)


def retrieval_view(text: str) -> str:
    """Content words in their original order, the form both chunks and queries are embedded in."""
    words = [w for w in _WORD.findall(normalize(text)) if len(w) > 2 and w not in RETRIEVAL_STOPWORDS]
    return " ".join(words) if words else normalize(text)
