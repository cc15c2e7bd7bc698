from __future__ import annotations

import datetime as dt

import pytest
from hijridate import Gregorian, Hijri
from hypothesis import given
from hypothesis import strategies as st

from deenkit.hijri import (
    CalendarQueryKind,
    CalendarRangeError,
    HijriDate,
    answer_calendar,
    detect_calendar_kind,
    gregorian_to_hijri,
    hijri_to_gregorian,
    load_events,
    month_length,
    next_event,
    supported_range,
    upcoming_events,
)

import oracles

LO, HI = supported_range()


@pytest.mark.parametrize("year,iso", sorted(oracles.PUBLISHED_MUHARRAM_1.items()))
def test_published_new_year(year, iso):
    assert hijri_to_gregorian(HijriDate(year, 1, 1)) == dt.date.fromisoformat(iso)
    assert gregorian_to_hijri(dt.date.fromisoformat(iso)) == HijriDate(year, 1, 1)


@given(st.dates(LO, HI))
def test_agrees_with_hijridate(d):
    h = gregorian_to_hijri(d)
    ref = Gregorian(d.year, d.month, d.day).to_hijri()
    assert (h.year, h.month, h.day) == (ref.year, ref.month, ref.day)
    assert hijri_to_gregorian(h) == Hijri(h.year, h.month, h.day).to_gregorian()


def test_month_lengths_match_hijridate_for_every_month():
    t0 = gregorian_to_hijri(LO).year
    t1 = gregorian_to_hijri(HI).year
    for y in range(t0, t1 + 1):
        for m in range(1, 13):
            assert month_length(y, m) == Hijri(y, m, 1).month_length(), (y, m)


def test_out_of_range():
    with pytest.raises(CalendarRangeError):
        gregorian_to_hijri(LO - dt.timedelta(days=1))
    with pytest.raises(CalendarRangeError):
        gregorian_to_hijri(HI + dt.timedelta(days=1))
    with pytest.raises(ValueError):
        hijri_to_gregorian(HijriDate(1447, 1, 31))


def test_events_are_unique_and_valid():
    events = load_events()
    assert len({e.key for e in events}) == len(events)
    assert all(1 <= e.hijri_month <= 12 and 1 <= e.hijri_day <= 30 for e in events)


def test_next_event_rolls_over_to_next_year():
    ramadan_1446 = hijri_to_gregorian(HijriDate(1446, 9, 1))
    assert next_event("ramadan_start", ramadan_1446) == ramadan_1446
    later = next_event("ramadan_start", ramadan_1446 + dt.timedelta(days=1))
    assert later == hijri_to_gregorian(HijriDate(1447, 9, 1))


def test_upcoming_is_sorted_and_limited():
    items = upcoming_events(dt.date(2025, 3, 10))
    assert len(items) == 5
    assert [d for d, _e in items] == sorted(d for d, _e in items)


@pytest.mark.parametrize(
    "query,kind",
    [
        ("what is today's hijri date", CalendarQueryKind.CURRENT_HIJRI),
        ("convert 2025-06-26 to hijri", CalendarQueryKind.GREG_TO_HIJRI),
        ("when is eid al-adha", CalendarQueryKind.EVENT_DATE),
        ("upcoming islamic events", CalendarQueryKind.UPCOMING_EVENTS),
        ("متى رمضان", CalendarQueryKind.EVENT_DATE),
    ],
)
def test_calendar_query_kinds(query, kind):
    assert detect_calendar_kind(query, today=dt.date(2025, 3, 10)) is kind


def test_answer_includes_disclaimer_and_dates():
    ans = answer_calendar("convert 26 June 2025 to hijri", dt.date(2025, 3, 10))
    assert ans.metadata["hijri"] == "1447-01-01"
    assert "Umm al-Qura" in ans.text
