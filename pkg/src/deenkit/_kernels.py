"""Numeric inner loops with an optional numba path.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy version
with identical results. Set ``DEENKIT_DISABLE_NUMBA=1`` to force the numpy path
(useful on platforms without numba or when debugging). ``USING_NUMBA`` reports
which path the public names are bound to.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

USING_NUMBA = NUMBA_AVAILABLE and os.environ.get("DEENKIT_DISABLE_NUMBA", "") not in ("1", "true", "yes")

FNV_OFFSET = np.uint64(14695981039346656037)
FNV_PRIME = np.uint64(1099511628211)


# --- character trigram hashing -------------------------------------------------


def _trigram_counts_np(codes: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=np.float64)
    if codes.shape[0] < 3:
        return out
    c = codes.astype(np.uint64)
    with np.errstate(over="ignore"):
        h = np.full(c.shape[0] - 2, FNV_OFFSET, dtype=np.uint64)
        for k in range(3):
            h = (h ^ c[k : c.shape[0] - 2 + k]) * FNV_PRIME
    np.add.at(out, (h % np.uint64(dim)).astype(np.int64), 1.0)
    return out


def _trigram_counts_nb_impl(codes, dim):
    out = np.zeros(dim, dtype=np.float64)
    n = codes.shape[0]
    for i in range(n - 2):
        h = np.uint64(14695981039346656037)
        for k in range(3):
            h = (h ^ np.uint64(codes[i + k])) * np.uint64(1099511628211)
        out[np.int64(h % np.uint64(dim))] += 1.0
    return out


# --- Levenshtein distance ---------------------------------------------------------


def _levenshtein_np(a: np.ndarray, b: np.ndarray) -> int:
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return int(max(n, m))
    prev = np.arange(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        # substitution/deletion are vectorised; insertion needs the running min
        sub = prev[:-1] + (b != a[i - 1])
        dele = prev[1:] + 1
        best = np.minimum(sub, dele)
        cur = np.empty(m + 1, dtype=np.int64)
        cur[0] = i
        # cur[j] = min(best[j-1], cur[j-1] + 1)  ==  min_k (best[k] + j-1-k), cur[0]+j
        idx = np.arange(m, dtype=np.int64)
        cur[1:] = np.minimum(np.minimum.accumulate(best - idx) + idx, i + idx + 1)
        prev = cur
    return int(prev[m])


def _levenshtein_nb_impl(a, b):
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return max(n, m)
    prev = np.arange(m + 1)
    cur = np.zeros(m + 1, dtype=prev.dtype)
    for i in range(1, n + 1):
        cur[0] = i
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            v = prev[j - 1] + cost
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            cur[j] = v
        prev, cur = cur, prev
    return prev[m]


# --- solar ephemeris ----------------------------------------------------------------
# Low-precision solar coordinates (Astronomical Almanac approximation, good to
# about 1 arc-minute between 1950 and 2050). Inputs are Julian days (UT).


def _sun_position_np(jd: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(jd, dtype=np.float64) - 2451545.0
    g = np.radians((357.529 + 0.98560028 * d) % 360.0)
    q = (280.459 + 0.98564736 * d) % 360.0
    lam = np.radians((q + 1.915 * np.sin(g) + 0.020 * np.sin(2 * g)) % 360.0)
    e = np.radians(23.439 - 0.00000036 * d)
    decl = np.degrees(np.arcsin(np.sin(e) * np.sin(lam)))
    ra = np.degrees(np.arctan2(np.cos(e) * np.sin(lam), np.cos(lam))) / 15.0
    ra = ra % 24.0
    eqt = q / 15.0 - ra
    eqt = eqt - 24.0 * np.round(eqt / 24.0)
    return decl, eqt


def _sun_position_nb_impl(jd):
    n = jd.shape[0]
    decl = np.empty(n)
    eqt = np.empty(n)
    for i in range(n):
        d = jd[i] - 2451545.0
        g = math.radians((357.529 + 0.98560028 * d) % 360.0)
        q = (280.459 + 0.98564736 * d) % 360.0
        lam = math.radians((q + 1.915 * math.sin(g) + 0.020 * math.sin(2 * g)) % 360.0)
        e = math.radians(23.439 - 0.00000036 * d)
        decl[i] = math.degrees(math.asin(math.sin(e) * math.sin(lam)))
        ra = (math.degrees(math.atan2(math.cos(e) * math.sin(lam), math.cos(lam))) / 15.0) % 24.0
        x = q / 15.0 - ra
        eqt[i] = x - 24.0 * np.round(x / 24.0)
    return decl, eqt


if NUMBA_AVAILABLE:
    _trigram_counts_nb = numba.njit(cache=True)(_trigram_counts_nb_impl)
    _levenshtein_nb = numba.njit(cache=True)(_levenshtein_nb_impl)
    _sun_position_nb = numba.njit(cache=True)(_sun_position_nb_impl)
else:  # pragma: no cover
    _trigram_counts_nb = _trigram_counts_nb_impl
    _levenshtein_nb = _levenshtein_nb_impl
    _sun_position_nb = _sun_position_nb_impl


def text_codes(text: str) -> np.ndarray:
    """Unicode code points of ``text`` as a uint32 array."""
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)


def trigram_counts(codes: np.ndarray, dim: int) -> np.ndarray:
    if USING_NUMBA:
        return _trigram_counts_nb(codes, dim)
    return _trigram_counts_np(codes, dim)


def levenshtein(a: str, b: str) -> int:
    ca, cb = text_codes(a), text_codes(b)
    if USING_NUMBA:
        return int(_levenshtein_nb(ca, cb))
    return _levenshtein_np(ca, cb)


def sun_position(jd) -> tuple[np.ndarray, np.ndarray]:
    """Solar declination (degrees) and equation of time (hours) at Julian days ``jd``."""
    arr = np.atleast_1d(np.asarray(jd, dtype=np.float64))
    if USING_NUMBA:
        return _sun_position_nb(arr)
    return _sun_position_np(arr)
