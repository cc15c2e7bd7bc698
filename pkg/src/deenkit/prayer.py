"""Prayer timetables, qibla bearing and location resolution.

Times come from hour-angle formulas over a low-precision solar position
(declination and equation of time, see ``_kernels.sun_position``). Each event
is re-evaluated a few times with the sun position at its own instant.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
import re
import threading
import time
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Protocol

from . import _kernels, prompts
from .core import ExecutionTrace, ValidationError
from .providers import TextGenerator
from .text import normalize

logger = logging.getLogger(__name__)

KAABA = (21.4225, 39.8262)
EARTH_RADIUS_KM = 6371.0
HORIZON_ALTITUDE = -0.833
MAX_LATITUDE = 65.0
PRAYER_NAMES = ("fajr", "sunrise", "dhuhr", "asr", "maghrib", "isha")


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float
    tz_minutes: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise ValidationError(f"latitude {self.lat} outside [-90, 90]")
        if not (math.isfinite(self.lon) and -180.0 < self.lon <= 180.0):
            raise ValidationError(f"longitude {self.lon} outside (-180, 180]")
        if not -14 * 60 <= self.tz_minutes <= 14 * 60:
            raise ValidationError(f"timezone offset {self.tz_minutes} min out of range")


@dataclass(frozen=True)
class CalcMethod:
    name: str
    fajr_angle: float
    isha_angle: float | None = None
    isha_minutes: int | None = None
    asr_factor: int = 1

    def __post_init__(self) -> None:
        if (self.isha_angle is None) == (self.isha_minutes is None):
            raise ValueError("a method needs exactly one of isha_angle / isha_minutes")
        if self.asr_factor not in (1, 2):
            raise ValueError("asr_factor must be 1 or 2")

    def with_asr_factor(self, factor: int) -> "CalcMethod":
        return CalcMethod(self.name, self.fajr_angle, self.isha_angle, self.isha_minutes, factor)


METHODS = {
    "MWL": CalcMethod("MWL", 18.0, isha_angle=17.0),
    "Egyptian": CalcMethod("Egyptian", 19.5, isha_angle=17.5),
    "UmmAlQura": CalcMethod("UmmAlQura", 18.5, isha_minutes=90),
    "ISNA": CalcMethod("ISNA", 15.0, isha_angle=15.0),
}
_METHOD_ALIASES = {
    "mwl": "MWL",
    "muslim world league": "MWL",
    "egyptian": "Egyptian",
    "egypt": "Egyptian",
    "ummalqura": "UmmAlQura",
    "umm al qura": "UmmAlQura",
    "makkah": "UmmAlQura",
    "isna": "ISNA",
    "north america": "ISNA",
}


def get_method(name: str) -> CalcMethod:
    spaced = re.sub(r"[\s_\-]+", " ", name.strip().lower())
    key = _METHOD_ALIASES.get(spaced) or _METHOD_ALIASES.get(spaced.replace(" ", ""))
    if key is None:
        raise ValidationError(f"unknown method {name!r}; choose one of {', '.join(METHODS)}")
    return METHODS[key]


# --- qibla --------------------------------------------------------------------------


class QiblaUndefined(ValidationError):
    def __init__(self, distance_km: float):
        super().__init__("undefined bearing: location is at the Kaaba")
        self.distance_km = 0.0


@dataclass(frozen=True)
class QiblaResult:
    bearing: float
    distance_km: float


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def initial_bearing(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle initial bearing from point 1 to point 2, degrees in [0, 360)."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    theta = math.degrees(math.atan2(math.sin(dl), math.cos(p1) * math.tan(p2) - math.sin(p1) * math.cos(dl)))
    theta %= 360.0
    # tiny negative angles wrap to exactly 360.0 in floating point
    return 0.0 if theta >= 360.0 else theta


def qibla(p: GeoPoint) -> QiblaResult:
    distance = haversine_km(p.lat, p.lon, *KAABA)
    if distance < 1.0:
        raise QiblaUndefined(distance)
    return QiblaResult(initial_bearing(p.lat, p.lon, *KAABA), distance)


# --- prayer times -------------------------------------------------------------------


class HighLatitudeError(ValidationError):
    pass


@dataclass(frozen=True)
class PrayerTimetable:
    date: dt.date
    method: str
    asr_factor: int
    times: dict[str, dt.datetime | None]
    # events moved by the night-portion rule because the pure angle time was undefined or too early
    adjusted: tuple[str, ...] = ()

    def __getitem__(self, name: str) -> dt.datetime | None:
        return self.times[name]

    def formatted(self) -> dict[str, str]:
        return {k: (v.strftime("%H:%M") if v is not None else "undefined") for k, v in self.times.items()}

    def is_ordered(self) -> bool:
        seq = [self.times[k] for k in PRAYER_NAMES]
        return all(t is not None for t in seq) and all(a < b for a, b in zip(seq, seq[1:]))

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "method": self.method,
            "asr_factor": self.asr_factor,
            "times": self.formatted(),
            "adjusted": list(self.adjusted),
        }


def julian_day(d: dt.date) -> float:
    """Julian day at 0h UT of the civil date ``d``."""
    return d.toordinal() + 1721424.5


def _hour_angle(altitude: float, lat: float, decl: float) -> float:
    """Hours between transit and the sun reaching ``altitude``; NaN when it never does."""
    p, d = math.radians(lat), math.radians(decl)
    cos_h = (math.sin(math.radians(altitude)) - math.sin(p) * math.sin(d)) / (math.cos(p) * math.cos(d))
    if cos_h < -1.0 or cos_h > 1.0:
        return math.nan
    return math.degrees(math.acos(cos_h)) / 15.0


def _asr_altitude(factor: int, lat: float, decl: float) -> float:
    return math.degrees(math.atan(1.0 / (factor + math.tan(math.radians(abs(lat - decl))))))


_ITERATIONS = 3


def _event_ut(jd0: float, lon: float, lat: float, guess_ut: float, altitude: Callable[[float], float] | None, side: int) -> float:
    """UT hours of an event; ``side`` is -1 before transit, +1 after, 0 for transit itself."""
    t = guess_ut
    for _ in range(_ITERATIONS):
        decl, eqt = _kernels.sun_position(jd0 + t / 24.0)
        decl, eqt = float(decl[0]), float(eqt[0])
        transit = 12.0 - eqt - lon / 15.0
        if side == 0:
            t = transit
            continue
        h = _hour_angle(altitude(decl), lat, decl)
        if math.isnan(h):
            return math.nan
        t = transit + side * h
    return t


def solar_schedule(
    p: GeoPoint,
    date: dt.date,
    method: CalcMethod,
    asr_factor: int | None = None,
    high_lat_rule: str | None = "angle_based",
) -> PrayerTimetable:
    """Timetable for ``date`` at ``p`` in the point's local standard time.

    With ``high_lat_rule="angle_based"`` fajr is never earlier than sunrise
    minus ``fajr_angle/60`` of the night and isha never later than sunset plus
    ``isha_angle/60`` of the night; this also fills in times the sun never
    reaches. With ``high_lat_rule=None`` such times are ``None``.
    """
    if abs(p.lat) > MAX_LATITUDE:
        raise HighLatitudeError(f"latitude {p.lat} beyond +-{MAX_LATITUDE}; timetable not supported")
    if high_lat_rule not in (None, "angle_based"):
        raise ValidationError(f"unknown high-latitude rule {high_lat_rule!r}")
    factor = asr_factor if asr_factor is not None else method.asr_factor
    if factor not in (1, 2):
        raise ValidationError("asr factor must be 1 or 2")

    jd0 = julian_day(date)
    tz = p.tz_minutes / 60.0
    lon, lat = p.lon, p.lat

    def ut(local_guess: float) -> float:
        return local_guess - tz

    hours: dict[str, float] = {
        "fajr": _event_ut(jd0, lon, lat, ut(5.0), lambda _d: -method.fajr_angle, -1),
        "sunrise": _event_ut(jd0, lon, lat, ut(6.0), lambda _d: HORIZON_ALTITUDE, -1),
        "dhuhr": _event_ut(jd0, lon, lat, ut(12.0), None, 0),
        "asr": _event_ut(jd0, lon, lat, ut(15.0), lambda d: _asr_altitude(factor, lat, d), +1),
        "maghrib": _event_ut(jd0, lon, lat, ut(18.0), lambda _d: HORIZON_ALTITUDE, +1),
    }
    if method.isha_angle is not None:
        hours["isha"] = _event_ut(jd0, lon, lat, ut(20.0), lambda _d: -method.isha_angle, +1)
    local = {k: v + tz for k, v in hours.items()}

    adjusted: list[str] = []
    if high_lat_rule == "angle_based" and not math.isnan(local["sunrise"]) and not math.isnan(local["maghrib"]):
        night = 24.0 - (local["maghrib"] - local["sunrise"])
        earliest_fajr = local["sunrise"] - method.fajr_angle / 60.0 * night
        if math.isnan(local["fajr"]) or local["fajr"] < earliest_fajr:
            local["fajr"] = earliest_fajr
            adjusted.append("fajr")
        if method.isha_angle is not None:
            latest_isha = local["maghrib"] + method.isha_angle / 60.0 * night
            if math.isnan(local["isha"]) or local["isha"] > latest_isha:
                local["isha"] = latest_isha
                adjusted.append("isha")

    midnight = dt.datetime.combine(date, dt.time())

    def stamp(h: float) -> dt.datetime | None:
        if math.isnan(h):
            return None
        return midnight + dt.timedelta(seconds=round(h * 3600.0))

    times = {k: stamp(local[k]) for k in PRAYER_NAMES if k != "isha"}
    if method.isha_minutes is not None:
        times["isha"] = times["maghrib"] + dt.timedelta(minutes=method.isha_minutes) if times["maghrib"] else None
    else:
        times["isha"] = stamp(local["isha"])
    times = {k: times[k] for k in PRAYER_NAMES}
    return PrayerTimetable(date, method.name, factor, times, tuple(adjusted))


# --- location resolution ---------------------------------------------------------------


@dataclass(frozen=True)
class City:
    name: str
    aliases: tuple[str, ...]
    point: GeoPoint


@lru_cache(maxsize=1)
def load_cities() -> tuple[City, ...]:
    text = resources.files("deenkit.data").joinpath("cities.tsv").read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    out = []
    for name, aliases, lat, lon, tz in csv.reader(lines, delimiter="\t"):
        names = tuple(dict.fromkeys([normalize(name)] + [normalize(a) for a in aliases.split("|") if a.strip()]))
        out.append(City(name, names, GeoPoint(float(lat), float(lon), int(tz))))
    return tuple(out)


@lru_cache(maxsize=1)
def _alias_patterns() -> list[tuple[re.Pattern[str], City]]:
    pairs = [(alias, city) for city in load_cities() for alias in city.aliases]
    pairs.sort(key=lambda pc: len(pc[0]), reverse=True)
    # Arabic clitics (bi-, li-, wa-) may be glued to the city name
    return [(re.compile(rf"(?<!\w)[بلو]?{re.escape(alias)}(?!\w)"), city) for alias, city in pairs]


def lookup_city(text: str) -> City | None:
    norm = normalize(text)
    if not norm:
        return None
    for pattern, city in _alias_patterns():
        if pattern.search(norm):
            return city
    return None


class Geocoder(Protocol):
    def geocode(self, place: str) -> tuple[float, float] | None: ...


class RateLimiter:
    """Token bucket; ``acquire`` blocks until a token is available."""

    def __init__(self, rate: float = 1.0, capacity: int = 1, clock: Callable[[], float] = time.monotonic, sleep: Callable[[float], None] = time.sleep):
        self.rate = rate
        self.capacity = capacity
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(capacity)
        self._stamp = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                self._sleep((1.0 - self._tokens) / self.rate)


class StubGeocoder:
    """No network; answers from a fixed table (empty by default)."""

    def __init__(self, known: dict[str, tuple[float, float]] | None = None):
        self.known = {normalize(k): v for k, v in (known or {}).items()}
        self.calls: list[str] = []

    def geocode(self, place: str) -> tuple[float, float] | None:
        self.calls.append(place)
        return self.known.get(normalize(place))


class HttpGeocoder:
    """Nominatim-style ``/search?q=...&format=json`` client behind a 1 req/s token bucket."""

    def __init__(self, base_url: str, limiter: RateLimiter | None = None, timeout: float = 10.0, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.limiter = limiter or RateLimiter(1.0)
        self._client = client or httpx.Client(timeout=timeout, headers={"User-Agent": "deenkit-geocoder"})

    def geocode(self, place: str) -> tuple[float, float] | None:
        self.limiter.acquire()
        try:
            resp = self._client.get(f"{self.base_url}/search", params={"q": place, "format": "json", "limit": 1})
            resp.raise_for_status()
            hits = resp.json()
        except Exception as exc:
            logger.warning("geocoder failed for %r: %s", place, exc)
            return None
        if not hits:
            return None
        return float(hits[0]["lat"]), float(hits[0]["lon"])


@dataclass(frozen=True)
class LocationResolution:
    point: GeoPoint
    stage: str
    disclaimer: bool
    name: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lat": self.point.lat,
            "lon": self.point.lon,
            "tz_minutes": self.point.tz_minutes,
            "stage": self.stage,
            "disclaimer": self.disclaimer,
        }


DEFAULT_LOCATION_NOTE = (
    "Location could not be determined; showing Makkah. Please name your city for accurate results. "
    "تعذر تحديد الموقع؛ النتائج لمكة المكرمة."
)

_PLACE = re.compile(r"(?:\bin|\bfor|\bat|\bfrom|\bof|(?<!\w)في|(?<!\w)من)\s+([^?,.!؟]+)", re.I)


def _place_phrase(text: str) -> str | None:
    """Trailing place phrase such as "in Springfield" -> "Springfield"."""
    found = _PLACE.findall(text)
    if not found:
        return None
    phrase = found[-1].strip()
    phrase = re.sub(r"\b(today|tomorrow|now|please)\b", "", phrase, flags=re.I).strip()
    return phrase or None


def resolve_location(
    query: str,
    generator: TextGenerator | None = None,
    geocoder: Geocoder | None = None,
    trace: ExecutionTrace | None = None,
) -> LocationResolution:
    trace = trace if trace is not None else ExecutionTrace()
    city = lookup_city(query)
    if city:
        trace.add("location", f"city_db: {city.name}")
        return LocationResolution(city.point, "city_db", False, city.name)

    if generator is not None:
        try:
            name = generator.generate(prompts.render(prompts.LOCATION, question=query), temperature=0.0, max_tokens=20).strip()
        except Exception as exc:
            trace.warn("location", f"extraction provider failed: {exc}")
            name = ""
        if name and name.lower() != "none":
            city = lookup_city(name)
            if city:
                trace.add("location", f"provider_extraction: {name!r} -> {city.name}")
                return LocationResolution(city.point, "provider_extraction", False, city.name)

    place = _place_phrase(query)
    if geocoder is not None and place:
        try:
            hit = geocoder.geocode(place)
        except Exception as exc:
            trace.warn("location", f"geocoder failed: {exc}")
            hit = None
        if hit is not None:
            lat, lon = hit
            # no timezone database; nearest whole-hour offset from longitude
            tz = int(round(lon / 15.0)) * 60
            trace.add("location", f"geocoder: {place!r} -> ({lat:.4f}, {lon:.4f}), tz from longitude")
            return LocationResolution(GeoPoint(lat, lon if lon != -180.0 else 180.0, tz), "geocoder", False, place)

    trace.add("location", "default: Makkah with disclaimer")
    return LocationResolution(GeoPoint(KAABA[0], KAABA[1], 180), "default", True, "Makkah")
