"""Umm al-Qura Hijri calendar: conversions, event ontology and calendar query answering.

Conversions use the embedded month-length table (AH 1343 to 1500). Dates
outside the table are refused rather than approximated by another algorithm.
"""

from __future__ import annotations

import bisect
import csv
import datetime as dt
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from .core import ExecutionTrace, ValidationError
from .text import ascii_digits, normalize

MONTHS_EN = (
    "Muharram",
    "Safar",
    "Rabi al-Awwal",
    "Rabi al-Thani",
    "Jumada al-Ula",
    "Jumada al-Akhirah",
    "Rajab",
    "Sha'ban",
    "Ramadan",
    "Shawwal",
    "Dhu al-Qa'dah",
    "Dhu al-Hijjah",
)
MONTHS_AR = (
    "محرم",
    "صفر",
    "ربيع الأول",
    "ربيع الآخر",
    "جمادى الأولى",
    "جمادى الآخرة",
    "رجب",
    "شعبان",
    "رمضان",
    "شوال",
    "ذو القعدة",
    "ذو الحجة",
)

DISCLAIMER = (
    "Dates follow the Umm al-Qura calendar; the actual start of a month may differ "
    "by a day depending on local moon sighting. "
    "التواريخ وفق تقويم أم القرى وقد تختلف بيوم واحد حسب رؤية الهلال محليا."
)


class CalendarRangeError(ValidationError):
    pass


class EventNotFound(ValidationError):
    pass


@dataclass(frozen=True, order=True)
class HijriDate:
    year: int
    month: int
    day: int

    def month_name(self, lang: str = "en") -> str:
        return (MONTHS_AR if lang == "ar" else MONTHS_EN)[self.month - 1]

    def format(self, lang: str = "en") -> str:
        if lang == "ar":
            return f"{self.day} {self.month_name('ar')} {self.year} هـ"
        return f"{self.day} {self.month_name()} {self.year} AH"

    def isoformat(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"


@dataclass(frozen=True)
class _Table:
    first_year: int
    starts: tuple[int, ...]  # proleptic ordinal of each month's first day, plus one sentinel
    lengths: tuple[int, ...]

    @property
    def last_year(self) -> int:
        return self.first_year + len(self.lengths) // 12 - 1


@lru_cache(maxsize=1)
def _table() -> _Table:
    text = resources.files("deenkit.data").joinpath("ummalqura.csv").read_text(encoding="utf-8")
    rows = list(csv.DictReader(text.splitlines()))
    starts: list[int] = []
    lengths: list[int] = []
    first = int(rows[0]["hijri_year"])
    for i, row in enumerate(rows):
        if int(row["hijri_year"]) != first + i:
            raise ValueError("calendar table years are not consecutive")
        ordinal = dt.date.fromisoformat(row["muharram_1"]).toordinal()
        if starts and ordinal != starts[-1] + lengths[-1]:
            raise ValueError(f"calendar table gap before AH {row['hijri_year']}")
        for n in map(int, row["month_lengths"].split()):
            if n not in (28, 29, 30, 31):
                # a few early years (AH 1343-1364) carry 28- and 31-day months in the official table
                raise ValueError(f"bad month length {n} in AH {row['hijri_year']}")
            starts.append(ordinal)
            lengths.append(n)
            ordinal += n
    starts.append(ordinal)
    return _Table(first, tuple(starts), tuple(lengths))


def supported_range() -> tuple[dt.date, dt.date]:
    t = _table()
    return dt.date.fromordinal(t.starts[0]), dt.date.fromordinal(t.starts[-1] - 1)


def month_length(year: int, month: int) -> int:
    t = _table()
    if not t.first_year <= year <= t.last_year:
        raise CalendarRangeError(f"Hijri year {year} outside supported range AH {t.first_year}-{t.last_year}")
    if not 1 <= month <= 12:
        raise ValidationError(f"Hijri month must be 1..12, got {month}")
    return t.lengths[(year - t.first_year) * 12 + month - 1]


def gregorian_to_hijri(d: dt.date) -> HijriDate:
    t = _table()
    ordinal = d.toordinal()
    if not t.starts[0] <= ordinal < t.starts[-1]:
        lo, hi = supported_range()
        raise CalendarRangeError(f"date {d.isoformat()} outside supported range {lo.isoformat()} to {hi.isoformat()}")
    idx = bisect.bisect_right(t.starts, ordinal) - 1
    return HijriDate(t.first_year + idx // 12, idx % 12 + 1, ordinal - t.starts[idx] + 1)


def hijri_to_gregorian(h: HijriDate) -> dt.date:
    n = month_length(h.year, h.month)
    if not 1 <= h.day <= n:
        raise ValidationError(f"day {h.day} invalid: {MONTHS_EN[h.month - 1]} {h.year} has {n} days")
    t = _table()
    return dt.date.fromordinal(t.starts[(h.year - t.first_year) * 12 + h.month - 1] + h.day - 1)


# --- events ----------------------------------------------------------------------


@dataclass(frozen=True)
class IslamicEvent:
    key: str
    name_ar: str
    name_en: str
    hijri_month: int
    hijri_day: int
    duration_days: int


@lru_cache(maxsize=1)
def load_events() -> tuple[IslamicEvent, ...]:
    text = resources.files("deenkit.data").joinpath("events.tsv").read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    events = []
    for row in csv.reader(lines, delimiter="\t"):
        key, ar, en, month, day, dur = row
        events.append(IslamicEvent(key, ar, en, int(month), int(day), int(dur)))
    if len({e.key for e in events}) != len(events):
        raise ValueError("duplicate event keys in ontology")
    return tuple(events)


def get_event(key: str) -> IslamicEvent:
    for ev in load_events():
        if ev.key == key:
            return ev
    known = ", ".join(e.key for e in load_events())
    raise EventNotFound(f"unknown event {key!r}; known events: {known}")


def _occurrence(ev: IslamicEvent, year: int) -> dt.date:
    day = min(ev.hijri_day, month_length(year, ev.hijri_month))
    return hijri_to_gregorian(HijriDate(year, ev.hijri_month, day))


def next_event(key: str, today: dt.date) -> dt.date:
    """First day of the event's next occurrence on or after ``today``."""
    ev = get_event(key)
    year = gregorian_to_hijri(today).year
    when = _occurrence(ev, year)
    if when < today:
        when = _occurrence(ev, year + 1)
    return when


def upcoming_events(today: dt.date, limit: int = 5) -> list[tuple[dt.date, IslamicEvent]]:
    order = {e.key: i for i, e in enumerate(load_events())}
    found = []
    for ev in load_events():
        try:
            found.append((next_event(ev.key, today), ev))
        except CalendarRangeError:
            continue
    found.sort(key=lambda item: (item[0], order[item[1].key]))
    return found[:limit]


# --- query handling -----------------------------------------------------------------


class CalendarQueryKind(str, Enum):
    CURRENT_HIJRI = "current_hijri"
    GREG_TO_HIJRI = "greg_to_hijri"
    HIJRI_TO_GREG = "hijri_to_greg"
    EVENT_DATE = "event_date"
    UPCOMING_EVENTS = "upcoming_events"


# normalized keyword -> event key; checked longest first
_EVENT_KEYWORDS = {
    "new year": "islamic_new_year",
    "hijri new year": "islamic_new_year",
    "راس السنه": "islamic_new_year",
    "tasua": "tasua",
    "تاسوعاء": "tasua",
    "ashura": "ashura",
    "ashoura": "ashura",
    "عاشوراء": "ashura",
    "mawlid": "mawlid",
    "mawlid al nabi": "mawlid",
    "المولد": "mawlid",
    "isra": "isra_miraj",
    "miraj": "isra_miraj",
    "الاسراء": "isra_miraj",
    "mid shaban": "mid_shaban",
    "النصف من شعبان": "mid_shaban",
    "ramadan": "ramadan_start",
    "رمضان": "ramadan_start",
    "badr": "battle_of_badr",
    "بدر": "battle_of_badr",
    "conquest of makkah": "conquest_of_makkah",
    "conquest of mecca": "conquest_of_makkah",
    "فتح مكه": "conquest_of_makkah",
    "last ten nights": "last_ten_nights",
    "العشر الاواخر": "last_ten_nights",
    "laylat al qadr": "laylat_al_qadr",
    "lailat al qadr": "laylat_al_qadr",
    "night of power": "laylat_al_qadr",
    "ليله القدر": "laylat_al_qadr",
    "eid al fitr": "eid_al_fitr",
    "eid ul fitr": "eid_al_fitr",
    "eid": "eid_al_fitr",
    "عيد الفطر": "eid_al_fitr",
    "العيد": "eid_al_fitr",
    "six days of shawwal": "shawwal_fasting",
    "ست من شوال": "shawwal_fasting",
    "first ten days of dhul hijjah": "dhul_hijjah_ten",
    "العشر الاوائل": "dhul_hijjah_ten",
    "hajj": "hajj",
    "الحج": "hajj",
    "tarwiyah": "day_of_tarwiyah",
    "الترويه": "day_of_tarwiyah",
    "arafah": "day_of_arafah",
    "arafat": "day_of_arafah",
    "عرفه": "day_of_arafah",
    "eid al adha": "eid_al_adha",
    "eid ul adha": "eid_al_adha",
    "عيد الاضحي": "eid_al_adha",
    "الاضحي": "eid_al_adha",
    "tashriq": "days_of_tashriq",
    "التشريق": "days_of_tashriq",
    "white days": "white_days_muharram",
    "الايام البيض": "white_days_muharram",
}
_EVENT_KEYS_SORTED = sorted(_EVENT_KEYWORDS, key=len, reverse=True)

_UPCOMING = re.compile(r"\bupcoming\b|\bnext (islamic )?(events|holidays|occasions)\b|المناسبات القادمه|المناسبات الاسلاميه القادمه|القادمه")
_TO_GREG = re.compile(r"\bto gregorian\b|\bin gregorian\b|\bgregorian (date )?(of|for)\b|ميلادي|بالميلادي")

_GREG_MONTHS = {
    name: i
    for i, names in enumerate(
        [
            ("january", "jan", "يناير"),
            ("february", "feb", "فبراير"),
            ("march", "mar", "مارس"),
            ("april", "apr", "ابريل"),
            ("may", "مايو"),
            ("june", "jun", "يونيو"),
            ("july", "jul", "يوليو"),
            ("august", "aug", "اغسطس"),
            ("september", "sep", "sept", "سبتمبر"),
            ("october", "oct", "اكتوبر"),
            ("november", "nov", "نوفمبر"),
            ("december", "dec", "ديسمبر"),
        ],
        1,
    )
    for name in names
}
_HIJRI_MONTHS = {
    name: i
    for i, names in enumerate(
        [
            ("muharram", "محرم"),
            ("safar", "صفر"),
            ("rabi al awwal", "rabi ul awwal", "rabi i", "ربيع الاول"),
            ("rabi al thani", "rabi al akhir", "rabi ul akhir", "rabi ii", "ربيع الاخر", "ربيع الثاني"),
            ("jumada al ula", "jumada al awwal", "jumada i", "جمادي الاولي"),
            ("jumada al akhirah", "jumada al thani", "jumada ii", "جمادي الاخره"),
            ("rajab", "رجب"),
            ("shaban", "sha ban", "شعبان"),
            ("ramadan", "رمضان"),
            ("shawwal", "شوال"),
            ("dhu al qadah", "dhul qadah", "dhu al qa dah", "ذو القعده"),
            ("dhu al hijjah", "dhul hijjah", "ذو الحجه"),
        ],
        1,
    )
    for name in names
}


def _find_month(text: str, table: dict[str, int]) -> tuple[int, int, int] | None:
    """(month, start, end) of the longest month name present as whole words."""
    best = None
    for name, month in table.items():
        for m in re.finditer(rf"(?<!\w){re.escape(name)}(?!\w)", text):
            if best is None or (m.end() - m.start()) > (best[2] - best[1]):
                best = (month, m.start(), m.end())
    return best


def parse_gregorian(text: str, today: dt.date) -> dt.date | None:
    norm = normalize(text)
    m = re.search(r"\b(\d{4})[-/](\d{1,2})[-/](\d{1,2})\b", ascii_digits(text))
    if m:
        try:
            return dt.date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        except ValueError:
            return None
    found = _find_month(norm, _GREG_MONTHS)
    if not found:
        return None
    month, start, end = found
    before, after = norm[:start], norm[end:]
    day_m = re.search(r"^\s*(\d{1,2})\b", after) or re.search(r"\b(\d{1,2})\s*$", before)
    year_m = re.search(r"\b(\d{4})\b", after) or re.search(r"\b(\d{4})\b", before)
    if not day_m:
        return None
    year = int(year_m.group(1)) if year_m else today.year
    try:
        return dt.date(year, month, int(day_m.group(1)))
    except ValueError:
        return None


def parse_hijri(text: str, today: dt.date) -> HijriDate | None:
    norm = normalize(text)
    found = _find_month(norm, _HIJRI_MONTHS)
    if not found:
        m = re.search(r"\b(1[34]\d\d)[-/](\d{1,2})[-/](\d{1,2})\b", norm)
        if m and re.search(r"hijri|\bah\b|هجري|هـ|ه\b", norm):
            return HijriDate(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        return None
    month, start, end = found
    before, after = norm[:start], norm[end:]
    day_m = re.search(r"\b(\d{1,2})\s*$", before) or re.search(r"^\s*(\d{1,2})\b", after)
    year_m = re.search(r"\b(1[34]\d\d)\b", after) or re.search(r"\b(1[34]\d\d)\b", before)
    if not day_m:
        return None
    year = int(year_m.group(1)) if year_m else gregorian_to_hijri(today).year
    return HijriDate(year, month, int(day_m.group(1)))


def find_event(text: str) -> str | None:
    norm = normalize(text).replace(" ul ", " al ")
    for phrase in _EVENT_KEYS_SORTED:
        if re.search(rf"(?<!\w){re.escape(normalize(phrase))}(?!\w)", norm):
            return _EVENT_KEYWORDS[phrase]
    return None


def detect_calendar_kind(query: str, trace: ExecutionTrace | None = None, today: dt.date | None = None) -> CalendarQueryKind:
    today = today or dt.date.today()
    norm = normalize(query)
    if _UPCOMING.search(norm):
        return CalendarQueryKind.UPCOMING_EVENTS
    hijri_in = parse_hijri(query, today) is not None
    greg_in = parse_gregorian(query, today) is not None
    if hijri_in and (_TO_GREG.search(norm) or not greg_in):
        return CalendarQueryKind.HIJRI_TO_GREG
    if greg_in:
        return CalendarQueryKind.GREG_TO_HIJRI
    if find_event(query):
        return CalendarQueryKind.EVENT_DATE
    if not re.search(r"today|current|now|date|اليوم|التاريخ|الان", norm) and trace is not None:
        trace.add("calendar", "ambiguous calendar query; defaulting to current Hijri date")
    return CalendarQueryKind.CURRENT_HIJRI


@dataclass
class CalendarAnswer:
    kind: CalendarQueryKind
    text: str
    metadata: dict


def _fmt_greg(d: dt.date, lang: str) -> str:
    return d.isoformat() if lang == "ar" else d.strftime("%A %d %B %Y")


def answer_calendar(query: str, today: dt.date, lang: str = "en", trace: ExecutionTrace | None = None) -> CalendarAnswer:
    trace = trace if trace is not None else ExecutionTrace()
    kind = detect_calendar_kind(query, trace, today)
    trace.add("calendar", f"query kind {kind.value}")
    meta: dict = {"kind": kind.value, "calendar": "umm_al_qura", "disclaimer": DISCLAIMER}

    if kind is CalendarQueryKind.GREG_TO_HIJRI:
        g = parse_gregorian(query, today)
        h = gregorian_to_hijri(g)
        meta.update(gregorian=g.isoformat(), hijri=h.isoformat())
        body = f"{_fmt_greg(g, lang)} = {h.format(lang)}"
    elif kind is CalendarQueryKind.HIJRI_TO_GREG:
        h = parse_hijri(query, today)
        g = hijri_to_gregorian(h)
        meta.update(gregorian=g.isoformat(), hijri=h.isoformat())
        body = f"{h.format(lang)} = {_fmt_greg(g, lang)}"
    elif kind is CalendarQueryKind.EVENT_DATE:
        ev = get_event(find_event(query))
        year_m = re.search(r"\b(19\d\d|20\d\d)\b", ascii_digits(query))
        # "Ramadan 2027" asks for the occurrence inside that Gregorian year
        start = max(today, dt.date(int(year_m.group(1)), 1, 1)) if year_m else today
        when = next_event(ev.key, start)
        h = gregorian_to_hijri(when)
        meta.update(event=ev.key, gregorian=when.isoformat(), hijri=h.isoformat(), duration_days=ev.duration_days)
        if lang == "ar":
            body = f"{ev.name_ar}: {h.format('ar')} الموافق {when.isoformat()}"
        else:
            body = f"{ev.name_en}: {h.format()} ({_fmt_greg(when, lang)})"
    elif kind is CalendarQueryKind.UPCOMING_EVENTS:
        items = upcoming_events(today)
        meta["events"] = [{"event": ev.key, "gregorian": d.isoformat()} for d, ev in items]
        lines = [
            f"- {ev.name_ar if lang == 'ar' else ev.name_en}: {gregorian_to_hijri(d).format(lang)} ({_fmt_greg(d, lang)})"
            for d, ev in items
        ]
        body = "\n".join(lines)
    else:
        h = gregorian_to_hijri(today)
        meta.update(gregorian=today.isoformat(), hijri=h.isoformat())
        if lang == "ar":
            body = f"التاريخ الهجري اليوم: {h.format('ar')}"
        else:
            body = f"Today's Hijri date is {h.format()} ({_fmt_greg(today, lang)})."
    return CalendarAnswer(kind, body + "\n\n" + DISCLAIMER, meta)
