"""Verbatim Quran lookup, surah resolution and validated structured queries.

The verse store is an SQLite file whose single table mirrors the canonical
schema (ID, Surah, Ayah, AyahText, SimpleText, Translation, Juz, Revelation).
Ingestion is offline and validates the corpus; at query time the file is
opened read-only with one connection per thread.
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import io
import os
import re
import sqlite3
import tempfile
import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import prompts
from ._kernels import levenshtein
from .core import Citation, ExecutionTrace, ValidationError
from .providers import Embedder, TextGenerator, TrigramEmbedder
from .router import IntentPrototype, PrototypeIndex
from .text import ascii_digits, detect_language, normalize, strip_diacritics

SCHEMA = """CREATE TABLE Quran (
    ID INTEGER PRIMARY KEY,
    Surah INTEGER,
    Ayah INTEGER,
    AyahText TEXT,
    SimpleText TEXT,
    Translation TEXT,
    Juz INTEGER,
    Revelation TEXT
)"""
COLUMNS = ("ID", "Surah", "Ayah", "AyahText", "SimpleText", "Translation", "Juz", "Revelation")
SURAH_COUNT = 114
VERSE_COUNT = 6236
CITATION_BASE = "https://quran.com"
FUZZY_THRESHOLD = 0.6

# sha256 of the bundled corpus files (see scripts/prepare_quran_corpus.py)
BUNDLED_VERSES_SHA256 = "7aa0039e21c589ad6230883cef898b7a493021d44587b989ef6a33b7efeb2df8"
BUNDLED_SURAHS_SHA256 = "c3ae1a51234247890fe9646509cc7d1a2988f163c4098c8118c0168d4994d8f8"

# first (surah, ayah) of each juz
JUZ_STARTS = (
    (1, 1), (2, 142), (2, 253), (3, 93), (4, 24), (4, 148), (5, 82), (6, 111), (7, 88), (8, 41),
    (9, 93), (11, 6), (12, 53), (15, 1), (17, 1), (18, 75), (21, 1), (23, 1), (25, 21), (27, 56),
    (29, 46), (33, 31), (36, 28), (39, 32), (41, 47), (46, 1), (51, 31), (58, 1), (67, 1), (78, 1),
)  # fmt: skip

NAMED_VERSES = {"ayat al kursi": (2, 255), "ayatul kursi": (2, 255), "اية الكرسي": (2, 255)}

GUIDANCE = (
    "Accepted reference formats: 2:275, 2:1-5, Al-Baqarah:275, Surah 2 Verse 275, "
    "verse 275 of Surah Al-Baqarah, سورة البقرة آية 275."
)


class QuranSubtype(str, Enum):
    SPECIFIC_VERSE = "specific_verse"
    FULL_SURAH = "full_surah"
    STATISTICS = "statistics"
    INTERPRETATION = "interpretation"


class QuranError(ValidationError):
    """Bad reference or query; the message carries guidance for the user."""


class SurahNotFound(QuranError):
    def __init__(self, name: str, suggestions: list[tuple[str, float]]):
        listed = ", ".join(f"{n} ({s:.2f})" for n, s in suggestions)
        super().__init__(f"could not resolve surah {name!r}; closest: {listed}")
        self.name = name
        self.suggestions = suggestions


class IngestionError(ValueError):
    pass


# --- corpus ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Surah:
    number: int
    name_ar: str
    name_en: str
    meaning: str
    revelation: str
    verses: int


@dataclass(frozen=True)
class VerseRecord:
    id: int
    surah: int
    ayah: int
    ayah_text: str
    simple_text: str
    translation: str
    juz: int
    revelation: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "surah": self.surah,
            "ayah": self.ayah,
            "ayah_text": self.ayah_text,
            "simple_text": self.simple_text,
            "translation": self.translation,
            "juz": self.juz,
            "revelation": self.revelation,
        }


def _data_path(name: str) -> Path:
    return Path(str(resources.files("deenkit.data").joinpath(name)))


def _read_surahs(text: str) -> tuple[Surah, ...]:
    rows = list(csv.DictReader(io.StringIO(text), delimiter="\t", quoting=csv.QUOTE_NONE))
    return tuple(
        Surah(int(r["number"]), r["name_ar"], r["name_en"], r["meaning"], r["revelation"], int(r["verses"])) for r in rows
    )


@lru_cache(maxsize=1)
def bundled_surahs() -> tuple[Surah, ...]:
    return _read_surahs(_data_path("surahs.tsv").read_text(encoding="utf-8"))


def surah_info(n: int) -> Surah:
    if not isinstance(n, int) or not 1 <= n <= SURAH_COUNT:
        raise QuranError(f"surah number must be 1..{SURAH_COUNT}, got {n}. {GUIDANCE}")
    return bundled_surahs()[n - 1]


def juz_of(surah: int, ayah: int) -> int:
    juz = 1
    for i, start in enumerate(JUZ_STARTS, 1):
        if (surah, ayah) >= start:
            juz = i
    return juz


def simple_text(uthmani: str) -> str:
    """Diacritic-free search form of an Uthmanic verse."""
    return strip_diacritics(uthmani)


def citation_url(surah: int, ayah: int) -> str:
    return f"{CITATION_BASE}/{surah}/{ayah}"


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class IngestReport:
    path: str
    surahs: int
    verses: int
    verses_sha256: str
    surahs_sha256: str

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def _read_verses(path: Path) -> list[tuple[int, int, str, str]]:
    opener = gzip.open if path.suffix == ".gz" else open
    rows = []
    with opener(path, "rt", encoding="utf-8", newline="") as fh:
        for n, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise IngestionError(f"line {n}: expected 4 tab-separated fields, got {len(parts)}")
            rows.append((int(parts[0]), int(parts[1]), parts[2], parts[3]))
    return rows


def ingest_quran(
    db_path: str | Path,
    verses_path: str | Path | None = None,
    surahs_path: str | Path | None = None,
    verify_hash: bool | None = None,
) -> IngestReport:
    """Build the verse store at ``db_path`` and validate counts and uniqueness.

    Bundled sources are checked against their pinned sha256; pass
    ``verify_hash=True`` to require the pinned hash for custom files too.
    """
    bundled = verses_path is None and surahs_path is None
    vpath = Path(verses_path) if verses_path else _data_path("quran_verses.tsv.gz")
    spath = Path(surahs_path) if surahs_path else _data_path("surahs.tsv")
    vhash, shash = sha256_file(vpath), sha256_file(spath)
    if verify_hash if verify_hash is not None else bundled:
        if vhash != BUNDLED_VERSES_SHA256 or shash != BUNDLED_SURAHS_SHA256:
            raise IngestionError("corpus files do not match the pinned sha256")

    surahs = _read_surahs(spath.read_text(encoding="utf-8"))
    if [s.number for s in surahs] != list(range(1, SURAH_COUNT + 1)):
        raise IngestionError(f"expected surahs 1..{SURAH_COUNT} in order")
    rows = _read_verses(vpath)
    if len(rows) != VERSE_COUNT:
        raise IngestionError(f"expected {VERSE_COUNT} verses, found {len(rows)}")
    keys = [(s, a) for s, a, _t, _tr in rows]
    dupes = [k for k, c in Counter(keys).items() if c > 1]
    if dupes:
        raise IngestionError(f"duplicate (surah, ayah) pairs: {dupes[:5]}")
    per_surah = Counter(s for s, _a in keys)
    for s in surahs:
        if per_surah.get(s.number, 0) != s.verses:
            raise IngestionError(f"surah {s.number}: {per_surah.get(s.number, 0)} verses, metadata says {s.verses}")
        ayahs = sorted(a for k, a in keys if k == s.number)
        if ayahs != list(range(1, s.verses + 1)):
            raise IngestionError(f"surah {s.number}: ayah numbers are not 1..{s.verses}")
    if sum(s.verses for s in surahs) != VERSE_COUNT:
        raise IngestionError("surah verse counts do not sum to the corpus size")

    db_path = Path(db_path)
    if db_path.exists():
        db_path.unlink()
    rev = {s.number: s.revelation for s in surahs}
    ordered = sorted(rows, key=lambda r: (r[0], r[1]))
    conn = sqlite3.connect(db_path)
    try:
        conn.execute(SCHEMA)
        conn.executemany(
            "INSERT INTO Quran VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
            (
                (i, s, a, text, simple_text(text), tr, juz_of(s, a), rev[s])
                for i, (s, a, text, tr) in enumerate(ordered, 1)
            ),
        )
        conn.execute("CREATE UNIQUE INDEX quran_ref ON Quran (Surah, Ayah)")
        conn.commit()
    finally:
        conn.close()
    return IngestReport(str(db_path), len(surahs), len(rows), vhash, shash)


# --- store ---------------------------------------------------------------------------------


class QuranStore:
    """Read-only verse store; each thread gets its own connection."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.exists():
            raise FileNotFoundError(f"verse store not found: {self.path}; run ingest-quran first")
        self._local = threading.local()
        self._lock = threading.Lock()
        self._conns: list[sqlite3.Connection] = []

    def _conn(self, purpose: str = "lookup") -> sqlite3.Connection:
        # plan execution gets its own connection with the authorizer installed for good
        conn = getattr(self._local, purpose, None)
        if conn is None:
            conn = sqlite3.connect(f"{self.path.resolve().as_uri()}?mode=ro", uri=True, check_same_thread=False)
            conn.execute("PRAGMA query_only = ON")
            if purpose == "plans":
                conn.set_authorizer(_Authorizer())
            setattr(self._local, purpose, conn)
            with self._lock:
                self._conns.append(conn)
        return conn

    def close(self) -> None:
        with self._lock:
            for conn in self._conns:
                conn.close()
            self._conns.clear()
        self._local = threading.local()

    def _records(self, sql: str, params: tuple) -> list[VerseRecord]:
        cur = self._conn().execute(f"SELECT {', '.join(COLUMNS)} FROM Quran WHERE {sql}", params)
        return [VerseRecord(*row) for row in cur.fetchall()]

    def verses(self, surah: int, start: int, end: int) -> list[VerseRecord]:
        return self._records("Surah = ? AND Ayah BETWEEN ? AND ? ORDER BY Ayah", (surah, start, end))

    def surah(self, n: int) -> list[VerseRecord]:
        return self._records("Surah = ? ORDER BY Ayah", (n,))

    def verse_count(self, surah: int | None = None) -> int:
        if surah is None:
            return self._conn().execute("SELECT COUNT(*) FROM Quran").fetchone()[0]
        return self._conn().execute("SELECT COUNT(*) FROM Quran WHERE Surah = ?", (surah,)).fetchone()[0]

    def all_records(self) -> list[VerseRecord]:
        return self._records("1 ORDER BY Surah, Ayah", ())

    def run(self, plan: "SqlPlan", max_steps: int = 5_000_000) -> tuple[list[str], list[tuple]]:
        """Execute a validated plan under the same authorizer used for validation."""
        conn = self._conn("plans")
        steps = {"n": 0}

        def progress() -> int:
            steps["n"] += 1
            return 1 if steps["n"] * 1000 > max_steps else 0

        conn.set_progress_handler(progress, 1000)
        cur = conn.execute(plan.statement)
        rows = cur.fetchall()
        cols = [d[0] for d in cur.description or ()]
        return cols, rows


_default_lock = threading.Lock()
_default: QuranStore | None = None


def default_store() -> QuranStore:
    """Store at $DEENKIT_QURAN_DB, or one built once per process from the bundled corpus."""
    global _default
    with _default_lock:
        if _default is None:
            env = os.environ.get("DEENKIT_QURAN_DB")
            if env:
                _default = QuranStore(env)
            else:
                path = Path(tempfile.mkdtemp(prefix="deenkit-")) / "quran.sqlite"
                ingest_quran(path)
                _default = QuranStore(path)
        return _default


# --- surah resolution ------------------------------------------------------------------------

_PREFIX = re.compile(r"^(?:surah|surat|sura|suratu|سوره)\s+")
_ARTICLE = re.compile(r"^(?:al|an|ar|as|ash|at|ath|ad|adh|az|aal)\s+")


def surah_key(name: str) -> str:
    """Matching key: casefolded, prefix and leading article stripped, no spaces."""
    key = normalize(name)
    key = _PREFIX.sub("", key)
    key = _ARTICLE.sub("", key)
    key = key.replace(" ", "")
    if key.startswith("ال") and len(key) > 3:
        key = key[2:]
    return key


def _similarity(a: str, b: str) -> float:
    if not a or not b:
        return 0.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


class SurahResolver:
    """Exact key lookup with fuzzy fallback (max of edit and embedding similarity)."""

    def __init__(self, embedder: Embedder | None = None, surahs: Iterable[Surah] | None = None):
        self.surahs = tuple(surahs) if surahs is not None else bundled_surahs()
        self.embedder = embedder or TrigramEmbedder()
        self.exact: dict[str, int] = {}
        names: list[tuple[str, int]] = []
        for s in self.surahs:
            for name in (s.name_en, s.name_ar):
                key = surah_key(name)
                if self.exact.setdefault(key, s.number) != s.number:
                    raise ValueError(f"surah key collision: {key!r}")
                names.append((key, s.number))
        # English meanings are secondary aliases: skip any that collide
        meaning_keys = Counter(surah_key(s.meaning) for s in self.surahs)
        for s in self.surahs:
            key = surah_key(s.meaning)
            if meaning_keys[key] == 1 and key not in self.exact:
                self.exact[key] = s.number
        self._names = names
        self._matrix = np.vstack([self.embedder.embed(k) for k, _n in names])

    def candidates(self, name: str) -> list[tuple[float, int]]:
        """(score, surah) for every surah, best first."""
        key = surah_key(name)
        vec = self.embedder.embed(key)
        cos = self._matrix @ vec
        best: dict[int, float] = {}
        for (k, n), c in zip(self._names, cos):
            score = max(_similarity(key, k), float(c))
            if score > best.get(n, -1.0):
                best[n] = score
        return sorted(((sc, n) for n, sc in best.items()), key=lambda t: (-t[0], t[1]))

    def lookup(self, name: str) -> int | None:
        """Exact match only."""
        text = name.strip()
        if text.isdigit():
            n = int(text)
            return n if 1 <= n <= SURAH_COUNT else None
        return self.exact.get(surah_key(text))

    def resolve(self, name: str) -> int:
        exact = self.lookup(name)
        if exact is not None:
            return exact
        if ascii_digits(name.strip()).isdigit():
            raise QuranError(f"surah number must be 1..{SURAH_COUNT}, got {name.strip()}. {GUIDANCE}")
        ranked = self.candidates(name)
        score, n = ranked[0]
        if score >= FUZZY_THRESHOLD:
            return n
        raise SurahNotFound(name, [(self.surahs[m - 1].name_en, round(s, 3)) for s, m in ranked[:3]])


@lru_cache(maxsize=1)
def default_resolver() -> SurahResolver:
    return SurahResolver()


def resolve_surah(name: str, resolver: SurahResolver | None = None) -> int:
    return (resolver or default_resolver()).resolve(ascii_digits(name))


# --- reference parsing -----------------------------------------------------------------------


@dataclass(frozen=True)
class VerseRef:
    surah: int
    start: int
    end: int

    def __post_init__(self) -> None:
        if not 1 <= self.surah <= SURAH_COUNT:
            raise QuranError(f"surah number must be 1..{SURAH_COUNT}, got {self.surah}. {GUIDANCE}")
        if self.start < 1 or self.end < self.start:
            raise QuranError(f"invalid ayah range {self.start}-{self.end}. {GUIDANCE}")
        count = surah_info(self.surah).verses
        if self.end > count:
            name = surah_info(self.surah).name_en
            raise QuranError(f"Surah {name} has {count} verses; ayah {self.end} does not exist. {GUIDANCE}")

    @property
    def label(self) -> str:
        span = str(self.start) if self.start == self.end else f"{self.start}-{self.end}"
        return f"{self.surah}:{span}"


@dataclass(frozen=True)
class SurahRef:
    """A reference that names only a surah."""

    surah: int

    def __post_init__(self) -> None:
        surah_info(self.surah)


_NUM_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "واحدة": 1, "اثنتين": 2, "آيتين": 2, "ثلاث": 3, "أربع": 4, "خمس": 5, "ست": 6, "سبع": 7, "ثمان": 8, "تسع": 9, "عشر": 10,
}  # fmt: skip
_N = r"(\d{1,3})"
_NUMERIC = re.compile(rf"(?<![\d:]){_N}\s*:\s*{_N}(?:\s*-\s*{_N})?(?![\d:])")
_NAMED = re.compile(rf"([^\W\d][\w'\- ]*?|[؀-ۿ][؀-ۿ ]*?)\s*:\s*{_N}(?:\s*-\s*{_N})?(?!\d)")
_SURAH_WORD = r"(?:surah|surat|sura|سورة|سوره)"
_VERSE_WORD = r"(?:verses?|ayahs?|ayat|aya|ayah|آية|الآية|آيات|الآيات|اية|الاية|ايه)"
_SURAH_THEN_VERSE = re.compile(
    rf"{_SURAH_WORD}\s+(.+?)\s*,?\s*(?:{_VERSE_WORD}|number|رقم)\s*(?:number\s*|رقم\s*)?{_N}(?:\s*(?:-|to|الى|إلى)\s*{_N})?",
    re.I,
)
_VERSE_THEN_SURAH = re.compile(
    rf"{_VERSE_WORD}\s*(?:number\s*|رقم\s*)?{_N}(?:\s*(?:-|to|الى|إلى)\s*{_N})?\s+(?:of|from|in|من|في)\s+(?:{_SURAH_WORD}\s+)?(.+)",
    re.I,
)
_LAST_N = re.compile(
    rf"(?:last|final|آخر|اخر)\s+(\d+|\w+)\s+{_VERSE_WORD}\s+(?:of|from|in|من|في)\s+(?:{_SURAH_WORD}\s+)?(.+)", re.I
)
_FIRST_N = re.compile(
    rf"(?:first|أول|اول)\s+(\d+|\w+)\s+{_VERSE_WORD}\s+(?:of|from|in|من|في)\s+(?:{_SURAH_WORD}\s+)?(.+)", re.I
)
_SURAH_ONLY = re.compile(rf"{_SURAH_WORD}\s+(.+)", re.I)
_TRAILING = re.compile(r"[?.!؟،,]+.*$")
_ARTICLE_PHRASE = re.compile(r"\b(?:al|an|ar|as|ash|at|ad|az)[\s-]+[a-z']+|\bال[؀-ۿ]+", re.I)
_BARE_NAME = re.compile(r"\b(?:in|of|from)\s+([a-z'-]+(?:\s+[a-z'-]+)?)", re.I)
_STOP_AFTER = re.compile(r"\s+(?:verse|ayah|ayat|and|in|please|for|with|of|آية|الآية|من|في)\b.*$", re.I)


def _clean_name(raw: str) -> str:
    name = _TRAILING.sub("", raw).strip(" '\"")
    return _STOP_AFTER.sub("", name).strip()


def _resolve_phrase(phrase: str, resolver: SurahResolver) -> int:
    """Resolve the longest word-prefix that matches exactly, else fuzzy on the whole phrase."""
    words = phrase.split()
    for n in range(min(len(words), 4), 0, -1):
        hit = resolver.lookup(" ".join(words[:n]))
        if hit is not None:
            return hit
    return resolver.resolve(" ".join(words[:4]))


def find_surah(text: str, resolver: SurahResolver | None = None) -> int | None:
    """Surah mentioned in free text: after a 'surah' keyword, as an article-led name,
    or as a bare name after a preposition (exact names only, so ordinary words pass)."""
    resolver = resolver or default_resolver()
    text = ascii_digits(text)
    m = _SURAH_ONLY.search(text)
    if m:
        phrase = _clean_name(m.group(1))
        if phrase:
            return _resolve_phrase(phrase, resolver)
    for m in _ARTICLE_PHRASE.finditer(text):
        hit = resolver.lookup(m.group(0))
        if hit is not None:
            return hit
    for m in _BARE_NAME.finditer(text):
        words = m.group(1).split()
        for n in range(len(words), 0, -1):
            hit = resolver.lookup(" ".join(words[:n]))
            if hit is not None:
                return hit
    return None


def _count(word: str) -> int | None:
    word = word.lower()
    if word.isdigit():
        return int(word)
    return _NUM_WORDS.get(word)


def parse_reference(q: str, resolver: SurahResolver | None = None) -> VerseRef | SurahRef:
    """Parse a verse reference; a surah with no ayah gives a ``SurahRef``."""
    resolver = resolver or default_resolver()
    text = " ".join(ascii_digits(q or "").split())
    if not text:
        raise QuranError(f"empty reference. {GUIDANCE}")
    low = normalize(text)
    for phrase, (s, a) in NAMED_VERSES.items():
        if normalize(phrase) in low:
            return VerseRef(s, a, a)

    m = _NUMERIC.search(text)
    if m:
        s, a = int(m.group(1)), int(m.group(2))
        return VerseRef(s, a, int(m.group(3)) if m.group(3) else a)
    m = _SURAH_THEN_VERSE.search(text)
    if m:
        s = _resolve_phrase(_clean_name(m.group(1)), resolver)
        a = int(m.group(2))
        return VerseRef(s, a, int(m.group(3)) if m.group(3) else a)
    for pattern, last in ((_LAST_N, True), (_FIRST_N, False)):
        m = pattern.search(text)
        if m and _count(m.group(1)):
            s = _resolve_phrase(_clean_name(m.group(2)), resolver)
            n = min(_count(m.group(1)), surah_info(s).verses)
            total = surah_info(s).verses
            return VerseRef(s, total - n + 1, total) if last else VerseRef(s, 1, n)
    m = _VERSE_THEN_SURAH.search(text)
    if m:
        s = _resolve_phrase(_clean_name(m.group(3)), resolver)
        a = int(m.group(1))
        return VerseRef(s, a, int(m.group(2)) if m.group(2) else a)
    m = _NAMED.search(text)
    if m:
        words = re.sub(rf"^.*?{_SURAH_WORD}\s+", "", m.group(1), flags=re.I).split()
        # the match may start earlier in the sentence: prefer the longest exact suffix
        s = next((hit for k in range(min(len(words), 4), 0, -1) if (hit := resolver.lookup(" ".join(words[-k:]))) is not None), None)
        if s is None:
            s = resolver.resolve(" ".join(words[-3:]))
        a = int(m.group(2))
        return VerseRef(s, a, int(m.group(3)) if m.group(3) else a)
    s = find_surah(text, resolver)
    if s is not None:
        return SurahRef(s)
    raise QuranError(f"could not parse a verse reference from {q!r}. {GUIDANCE}")


# --- fetching ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class VerseFetch:
    records: tuple[VerseRecord, ...]
    url: str
    surah: Surah

    @property
    def label(self) -> str:
        first, last = self.records[0].ayah, self.records[-1].ayah
        span = str(first) if first == last else f"{first}-{last}"
        return f"Surah {self.surah.name_en} {self.surah.number}:{span}"

    def citation(self, tag: int = 1) -> Citation:
        return Citation(tag, self.label, self.url, kind="quran")

    def render(self, with_translation: bool = True) -> str:
        lines = []
        for r in self.records:
            lines.append(f"({r.surah}:{r.ayah}) {r.ayah_text}")
            if with_translation:
                lines.append(r.translation)
        return "\n".join(lines)


def fetch_verses(ref: VerseRef, store: QuranStore | None = None) -> VerseFetch:
    store = store or default_store()
    records = store.verses(ref.surah, ref.start, ref.end)
    if len(records) != ref.end - ref.start + 1:
        raise QuranError(f"verses {ref.label} are not in the store. {GUIDANCE}")
    return VerseFetch(tuple(records), citation_url(ref.surah, ref.start), surah_info(ref.surah))


def full_surah(n: int, store: QuranStore | None = None) -> VerseFetch:
    info = surah_info(n)
    records = (store or default_store()).surah(n)
    if len(records) != info.verses:
        raise QuranError(f"surah {n} is incomplete in the store")
    return VerseFetch(tuple(records), citation_url(n, 1), info)


# --- structured queries -------------------------------------------------------------------------


class SqlRejected(QuranError):
    def __init__(self, rule: str, detail: str = ""):
        super().__init__(f"query rejected ({rule}){': ' + detail if detail else ''}")
        self.rule = rule


class UnsupportedQuery(QuranError):
    pass


class EvaluationError(RuntimeError):
    """The gold statement itself failed to execute."""


@dataclass(frozen=True)
class SqlPlan:
    statement: str
    tables: frozenset[str] = frozenset({"Quran"})
    read_only: bool = True
    description: str = ""
    origin: str = "template"


_FORBIDDEN = frozenset(
    """insert update delete drop create alter attach detach pragma vacuum reindex analyze begin commit
    rollback savepoint release replace_into upsert load_extension readfile writefile edit fts3_tokenizer""".split()
)
_ALLOWED_FUNCTIONS = frozenset(
    """count sum total min max avg length lower upper replace substr substring instr abs round coalesce ifnull
    nullif trim ltrim rtrim group_concat like glob cast typeof""".split()
)


def _lex(stmt: str) -> tuple[str, int]:
    """(statement with literals blanked, number of statement separators outside literals)."""
    out: list[str] = []
    seps = 0
    i, n = 0, len(stmt)
    while i < n:
        ch = stmt[i]
        if ch in "'\"`[":
            close = "]" if ch == "[" else ch
            j = i + 1
            while j < n:
                if stmt[j] == close:
                    if close != "]" and j + 1 < n and stmt[j + 1] == close:
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise SqlRejected("syntax", "unterminated quoted token")
            # identifiers keep their text so table names stay checkable
            out.append(" '' " if ch == "'" else " " + stmt[i + 1 : j] + " ")
            i = j + 1
            continue
        if stmt.startswith("--", i) or stmt.startswith("/*", i):
            raise SqlRejected("comment", "comments are not allowed")
        if ch == ";":
            seps += 1
        out.append(ch)
        i += 1
    return "".join(out), seps


class _Authorizer:
    """sqlite3 authorizer: SELECT reads of table Quran and allow-listed functions only."""

    def __init__(self) -> None:
        self.tables: set[str] = set()
        self.denied: list[str] = []

    def __call__(self, action: int, arg1: str | None, arg2: str | None, db: str | None, source: str | None) -> int:
        if action == sqlite3.SQLITE_SELECT:
            return sqlite3.SQLITE_OK
        if action == sqlite3.SQLITE_READ:
            if (arg1 or "").lower() == "quran" and db in ("main", None):
                self.tables.add("Quran")
                return sqlite3.SQLITE_OK
            self.denied.append(f"read of {db}.{arg1}")
            return sqlite3.SQLITE_DENY
        if action == sqlite3.SQLITE_FUNCTION:
            if (arg2 or "").lower() in _ALLOWED_FUNCTIONS:
                return sqlite3.SQLITE_OK
            self.denied.append(f"function {arg2}")
            return sqlite3.SQLITE_DENY
        self.denied.append(f"action {action}")
        return sqlite3.SQLITE_DENY


def validate_sql(stmt: str) -> SqlPlan:
    """Accept one read-only SELECT over table Quran; raise ``SqlRejected`` naming the rule."""
    if not isinstance(stmt, str) or not stmt.strip():
        raise SqlRejected("empty")
    text = stmt.strip()
    if text.endswith(";"):
        text = text[:-1].rstrip()
    blanked, seps = _lex(text)
    if seps:
        raise SqlRejected("multi-statement", "exactly one statement is allowed")
    words = re.findall(r"[A-Za-z_][A-Za-z_0-9]*", blanked)
    if not words or words[0].lower() != "select":
        raise SqlRejected("not-select", "only SELECT statements are allowed")
    lowered = [w.lower() for w in words]
    for w in lowered:
        if w in _FORBIDDEN:
            raise SqlRejected("write-or-ddl" if w not in ("attach", "detach") else "attachment", f"keyword {w.upper()}")
    for a, b in zip(lowered, lowered[1:]):
        if a in ("from", "join") and b != "quran" and b != "select":
            raise SqlRejected("foreign-table", f"table {b}")

    guard = _Authorizer()
    scratch = sqlite3.connect(":memory:")
    try:
        scratch.execute(SCHEMA)
        scratch.set_authorizer(guard)
        scratch.execute("EXPLAIN " + text)
    except sqlite3.DatabaseError as exc:
        if guard.denied:
            rule = "foreign-table" if any(d.startswith("read") for d in guard.denied) else "disallowed-operation"
            raise SqlRejected(rule, "; ".join(guard.denied)) from None
        raise SqlRejected("syntax", str(exc)) from None
    except (sqlite3.ProgrammingError, sqlite3.Warning) as exc:
        raise SqlRejected("multi-statement", str(exc)) from None
    finally:
        scratch.close()
    if guard.tables != {"Quran"}:
        raise SqlRejected("no-table", "the statement must read table Quran")
    return SqlPlan(text, frozenset(guard.tables), True)


def _quote(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


_WORD_FREQ = re.compile(
    r"how many times (?:is|does|do|did|has|was)? ?(?:the )?(?:word |term |name )?['\"“]?([\w؀-ۿ]+)['\"”]? "
    r"(?:appear|occur|mentioned|come|used|repeated)|"
    r"كم مرة (?:ذكرت|ذكر|وردت|ورد|تكررت|جاءت)? ?(?:كلمة|لفظ)? ?([؀-ۿ]+)",
    re.I,
)
_MECCAN = re.compile(r"mecca|makk|makkah|مكي|مكية", re.I)
_MEDINAN = re.compile(r"medina|madin|madani|مدني|مدنية", re.I)


def _template_sql(question: str, resolver: SurahResolver) -> SqlPlan:
    q = " ".join(ascii_digits(question).split())
    low = q.lower()

    m = _WORD_FREQ.search(q)
    if m:
        word = m.group(1) or m.group(2)
        if re.search(r"[؀-ۿ]", word):
            col, needle = "SimpleText", simple_text(word)
        else:
            col, needle = "LOWER(Translation)", word.lower()
        lit = _quote(needle)
        return SqlPlan(
            f"SELECT SUM((LENGTH({col}) - LENGTH(REPLACE({col}, {lit}, ''))) / LENGTH({lit})) "
            f"FROM Quran WHERE {col} LIKE {_quote('%' + needle + '%')}",
            description=f"occurrences of {word!r}",
        )

    revelation_q = re.search(r"makki|madani|meccan|medinan|mecca|medina|revealed|مكية|مدنية|مكي|مدني|نزلت", low)
    try:
        surah = find_surah(q, resolver)
    except SurahNotFound:
        surah = None
    m_juz = re.search(r"(?:juz|para|جزء|الجزء)\s*(\d{1,2})", low)
    counting = re.search(r"how many|number of|count|كم|عدد", low)
    most = re.search(r"\b(most|longest|largest|maximum|أكثر|اطول|أطول)\b", low)
    least = re.search(r"\b(least|fewest|shortest|smallest|minimum|أقل|اقل|أقصر|اقصر)\b", low)

    if (most or least) and re.search(r"surah|سورة|سوره", low) and surah is None:
        direction = "DESC" if most else "ASC"
        return SqlPlan(
            f"SELECT Surah, COUNT(*) AS verses FROM Quran GROUP BY Surah ORDER BY verses {direction}, Surah LIMIT 1",
            description=f"surah with the {'most' if most else 'fewest'} verses",
        )
    if surah is not None and revelation_q and not counting:
        return SqlPlan(
            f"SELECT DISTINCT Revelation FROM Quran WHERE Surah = {surah}",
            description=f"revelation of Surah {surah_info(surah).name_en}",
        )
    if re.search(r"which juz|what juz|أي جزء|في أي جزء", low):
        ref = parse_reference(q, resolver)
        if isinstance(ref, VerseRef):
            return SqlPlan(
                f"SELECT DISTINCT Juz FROM Quran WHERE Surah = {ref.surah} AND Ayah BETWEEN {ref.start} AND {ref.end}",
                description=f"juz of {ref.label}",
            )
    if counting:
        if re.search(r"surahs|chapters|سور\b|السور", low):
            where = ""
            if _MECCAN.search(low):
                where, desc = " WHERE Revelation = 'Meccan'", "number of Meccan surahs"
            elif _MEDINAN.search(low):
                where, desc = " WHERE Revelation = 'Medinan'", "number of Medinan surahs"
            else:
                desc = "number of surahs"
            return SqlPlan(f"SELECT COUNT(DISTINCT Surah) FROM Quran{where}", description=desc)
        if surah is not None:
            return SqlPlan(
                f"SELECT COUNT(*) FROM Quran WHERE Surah = {surah}",
                description=f"number of verses in Surah {surah_info(surah).name_en}",
            )
        if m_juz:
            juz = int(m_juz.group(1))
            if not 1 <= juz <= 30:
                raise UnsupportedQuery(f"juz must be 1..30, got {juz}")
            return SqlPlan(f"SELECT COUNT(*) FROM Quran WHERE Juz = {juz}", description=f"number of verses in juz {juz}")
        if _MECCAN.search(low):
            return SqlPlan("SELECT COUNT(*) FROM Quran WHERE Revelation = 'Meccan'", description="number of Meccan verses")
        if _MEDINAN.search(low):
            return SqlPlan("SELECT COUNT(*) FROM Quran WHERE Revelation = 'Medinan'", description="number of Medinan verses")
        if re.search(r"verses|ayat|ayahs|آيات|الآيات|ايات", low):
            return SqlPlan("SELECT COUNT(*) FROM Quran", description="number of verses in the Quran")
    if surah is not None and re.search(r"write|recite|show|give|entire|whole|full|complete|text|اكتب|كاملة|اعرض", low):
        return SqlPlan(
            f"SELECT Ayah, AyahText FROM Quran WHERE Surah = {surah} ORDER BY Ayah",
            description=f"full text of Surah {surah_info(surah).name_en}",
        )
    raise UnsupportedQuery(
        "this statistics question is outside the supported patterns: verse counts per surah, juz or "
        "revelation type, surah counts, most/fewest verses, Meccan/Medinan lookup, word frequency, full surah text"
    )


_SQL_BLOCK = re.compile(r"```(?:sql)?\s*(.*?)```", re.S | re.I)


def nl_to_sql(
    question: str,
    generator: TextGenerator | None = None,
    resolver: SurahResolver | None = None,
    trace: ExecutionTrace | None = None,
    temperature: float = 0.1,
) -> SqlPlan:
    """Provider translation when a generator is given, else (or on rejection) the template grammar."""
    trace = trace if trace is not None else ExecutionTrace()
    resolver = resolver or default_resolver()
    if generator is not None:
        try:
            raw = generator.generate(prompts.render(prompts.NL2SQL, question=question), temperature=temperature, max_tokens=300)
            m = _SQL_BLOCK.search(raw)
            plan = validate_sql((m.group(1) if m else raw).strip())
            trace.add("nl2sql", "provider statement accepted")
            return SqlPlan(plan.statement, plan.tables, True, "provider result", "provider")
        except SqlRejected as exc:
            trace.warn("nl2sql", f"provider statement rejected ({exc.rule}); template grammar used")
        except Exception as exc:
            trace.warn("nl2sql", f"provider failed: {exc}; template grammar used")
    plan = _template_sql(question, resolver)
    checked = validate_sql(plan.statement)
    trace.add("nl2sql", f"template: {plan.description}")
    return SqlPlan(checked.statement, checked.tables, checked.read_only, plan.description, "template")


def _as_plan(plan: SqlPlan | str) -> SqlPlan:
    return validate_sql(plan.statement if isinstance(plan, SqlPlan) else plan)


def execute_sql(plan: SqlPlan | str, store: QuranStore | None = None) -> tuple[list[str], list[tuple]]:
    return (store or default_store()).run(_as_plan(plan))


def _denotation(rows: list[tuple]) -> tuple[str, Any]:
    if len(rows) == 1 and len(rows[0]) == 1:
        return "scalar", rows[0][0]
    return "rows", Counter(rows)


def denotational_match(pred: SqlPlan | str, gold: SqlPlan | str, store: QuranStore | None = None) -> str:
    """``"correct"`` iff both statements denote the same result on the store."""
    store = store or default_store()
    try:
        _cols, gold_rows = store.run(_as_plan(gold))
    except (QuranError, sqlite3.Error) as exc:
        raise EvaluationError(f"gold statement failed: {exc}") from exc
    try:
        _cols, pred_rows = store.run(_as_plan(pred))
    except (QuranError, sqlite3.Error):
        return "incorrect"
    return "correct" if _denotation(pred_rows) == _denotation(gold_rows) else "incorrect"


def evaluate_nl2sql(gold: Iterable[dict], pred: Iterable[dict], store: QuranStore | None = None) -> dict[str, Any]:
    """Execution accuracy of predicted statements against gold ones, paired by ``id``.

    Records are ``{"id", "sql"}`` (a ``question`` field is carried through).
    A missing prediction counts as incorrect.
    """
    store = store or default_store()
    predictions = {str(r["id"]): r.get("sql", "") for r in pred}
    rows = []
    for rec in gold:
        key = str(rec["id"])
        verdict = denotational_match(predictions[key], rec["sql"], store) if key in predictions else "incorrect"
        rows.append({"id": key, "question": rec.get("question", ""), "verdict": verdict})
    if not rows:
        raise ValueError("gold file has no records")
    correct = sum(r["verdict"] == "correct" for r in rows)
    return {"total": len(rows), "correct": correct, "accuracy": correct / len(rows), "results": rows}


# --- subtype classification ----------------------------------------------------------------------


@lru_cache(maxsize=4)
def _subtype_index(embedder_key: int, embedder: Embedder) -> PrototypeIndex:
    protos = [
        IntentPrototype(label, detect_language(text), text)
        for label, texts in prompts.QURAN_SUBTYPE_EXAMPLES.items()
        for text in texts
    ]
    order = {s.value: i for i, s in enumerate(QuranSubtype)}
    return PrototypeIndex(embedder, protos, order)


_default_embedder = TrigramEmbedder()


def _parse_subtype(raw: str) -> QuranSubtype | None:
    first = raw.strip().splitlines()[0] if raw.strip() else ""
    token = re.sub(r"[^a-z_]", "", first.lower())
    try:
        return QuranSubtype(token)
    except ValueError:
        return None


def classify_subtype(
    query: str,
    generator: TextGenerator | None = None,
    embedder: Embedder | None = None,
    trace: ExecutionTrace | None = None,
) -> QuranSubtype:
    """Provider label when it is one of the four; otherwise nearest Quran exemplar."""
    trace = trace if trace is not None else ExecutionTrace()
    if generator is not None:
        try:
            raw = generator.generate(prompts.render(prompts.QURAN_SUBTYPE, question=query), temperature=0.0, max_tokens=20)
            parsed = _parse_subtype(raw)
            if parsed is not None:
                trace.add("quran_subtype", f"{parsed.value} (provider)")
                return parsed
            trace.add("quran_subtype", f"provider output {raw.strip()[:40]!r} is not a sub-type; fallback")
        except Exception as exc:
            trace.warn("quran_subtype", f"provider failed: {exc}; fallback")
    emb = embedder or _default_embedder
    index = _subtype_index(id(emb), emb)
    (label, _lang), sim1, sim2, exemplar = index.nearest(emb.embed(query))
    trace.add("quran_subtype", f"{label} (fallback; nearest exemplar {exemplar!r}, sim {sim1:.3f} vs {sim2:.3f})")
    return QuranSubtype(label)


# --- answering ---------------------------------------------------------------------------------


@dataclass
class QuranAnswer:
    subtype: QuranSubtype
    text: str
    citations: list[Citation] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)
    verses: tuple[VerseRecord, ...] = ()


def _verse_answer(fetch: VerseFetch, lang: str) -> str:
    head = f"{fetch.label} [Q1]" if lang != "ar" else f"سورة {fetch.surah.name_ar} {fetch.label.split()[-1]} [Q1]"
    return head + "\n" + fetch.render(with_translation=lang != "ar")


def _format_result(plan: SqlPlan, cols: list[str], rows: list[tuple]) -> str:
    if len(rows) == 1 and len(rows[0]) == 1:
        value = rows[0][0]
        if plan.description.startswith("surah with"):
            return f"{plan.description}: {value}"
        return f"{plan.description[:1].upper() + plan.description[1:]}: {value if value is not None else 0}"
    if plan.description.startswith("surah with") and rows:
        s, n = rows[0]
        return f"The {plan.description} is Surah {surah_info(s).name_en} ({s}) with {n} verses."
    lines = [plan.description[:1].upper() + plan.description[1:] + ":"] if plan.description else []
    lines += [" | ".join(str(v) for v in row) for row in rows]
    return "\n".join(lines)


def answer_quran(
    query: str,
    subtype: QuranSubtype,
    store: QuranStore | None = None,
    generator: TextGenerator | None = None,
    resolver: SurahResolver | None = None,
    trace: ExecutionTrace | None = None,
    lang: str = "en",
) -> QuranAnswer:
    """Execute a non-interpretation subtype. Raises ``QuranError`` with guidance."""
    store = store or default_store()
    resolver = resolver or default_resolver()
    trace = trace if trace is not None else ExecutionTrace()
    if subtype is QuranSubtype.SPECIFIC_VERSE:
        try:
            ref = parse_reference(query, resolver)
        except SurahNotFound:
            raise
        except QuranError:
            surah = find_surah(query, resolver)
            if surah is None:
                raise
            ref = SurahRef(surah)
            trace.add("quran", "reference parsing failed; surah-level lookup")
        if isinstance(ref, SurahRef):
            trace.add("quran", f"partial reference: surah {ref.surah} only; returning the surah")
            fetch = full_surah(ref.surah, store)
        else:
            fetch = fetch_verses(ref, store)
        trace.add("quran", f"fetched {fetch.label}")
        return QuranAnswer(subtype, _verse_answer(fetch, lang), [fetch.citation(1)], {"url": fetch.url, "reference": fetch.label}, fetch.records)
    if subtype is QuranSubtype.FULL_SURAH:
        surah = find_surah(query, resolver)
        if surah is None:
            try:
                ref = parse_reference(query, resolver)
                surah = ref.surah
            except QuranError:
                raise QuranError(f"name the surah to write out, e.g. 'Write Surah Al-Fatiha'. {GUIDANCE}") from None
        plan = validate_sql(f"SELECT Ayah, AyahText FROM Quran WHERE Surah = {surah} ORDER BY Ayah")
        fetch = full_surah(surah, store)
        trace.add("quran", f"full surah {surah} ({len(fetch.records)} verses)")
        return QuranAnswer(subtype, _verse_answer(fetch, lang), [fetch.citation(1)], {"url": fetch.url, "sql": plan.statement}, fetch.records)
    if subtype is QuranSubtype.STATISTICS:
        plan = nl_to_sql(query, generator, resolver, trace)
        cols, rows = store.run(plan)
        trace.add("quran", f"executed: {plan.statement}")
        return QuranAnswer(subtype, _format_result(plan, cols, rows), [], {"sql": plan.statement, "columns": cols, "rows": [list(r) for r in rows]})
    raise ValueError("interpretation is answered by the retrieval pipeline")
