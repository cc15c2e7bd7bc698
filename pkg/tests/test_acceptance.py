"""One test per acceptance criterion; the terminal summary prints a verdict line for each."""

from __future__ import annotations

import datetime as dt
import hashlib
import itertools
import json
import random
import threading
import time
from decimal import Decimal
from fractions import Fraction as F
from importlib import resources

import pytest

from deenkit import config as cfgmod
from deenkit.core import referenced_tags
from deenkit.dua import FALLBACK_AR, FALLBACK_EN, load_duas, render_entry
from deenkit.engine import Engine
from deenkit.faraid import KINDS, MAX_COUNT, MadhhabPolicy, ValidationError, assign_fard, distribute
from deenkit.hijri import HijriDate, gregorian_to_hijri, hijri_to_gregorian, month_length, supported_range
from deenkit.prayer import KAABA, METHODS, GeoPoint, QiblaUndefined, qibla, solar_schedule
from deenkit.providers import FailingTextGenerator, ScriptedTextGenerator, TrigramEmbedder
from deenkit.quran import (
    SqlRejected,
    VerseRef,
    bundled_surahs,
    citation_url,
    denotational_match,
    fetch_verses,
    ingest_quran,
    parse_reference,
    resolve_surah,
    validate_sql,
)
from deenkit.router import Router, evaluate_router, margin_confidence
from deenkit.zakat import MetalPrices, ZakatAssets, compute_zakat, display, nisab

import oracles
from conftest import read_jsonl

criterion = pytest.mark.criterion


@criterion("AC1", "zakat agrees with the line-by-line oracle on 1000 seeded inputs")
def test_zakat_oracle_equivalence():
    rng = random.Random(20250310)
    t0 = time.perf_counter()
    for _ in range(1000):
        amt = lambda hi: Decimal(rng.randint(0, hi * 100)) / 100  # noqa: E731
        cash, gold_g, silver_g, business, stocks, debts = amt(200_000), amt(500), amt(3000), amt(100_000), amt(100_000), amt(150_000)
        pg, ps = Decimal(rng.randint(1, 20_000)) / 100, Decimal(rng.randint(1, 500)) / 100
        out = compute_zakat(ZakatAssets(cash, gold_g, silver_g, business, stocks), debts, MetalPrices(pg, ps))
        ref = oracles.zakat_monetary(cash, gold_g, silver_g, business, stocks, debts, pg, ps)
        assert display(out.monetary_due) == oracles.to_minor_unit(ref["due"])
        assert F(out.nisab) == ref["nisab"]
        n, n_gold, n_silver = nisab(MetalPrices(pg, ps))
        assert n == min(n_gold, n_silver) and n_gold == 85 * pg and n_silver == 595 * ps
    n, n_gold, n_silver = nisab(MetalPrices("7", "1"))
    assert n == n_gold == n_silver == 595
    assert time.perf_counter() - t0 < 5.0


@criterion("AC2", "faraid shares sum to one over every heir multiset")
def test_faraid_soundness():
    t0 = time.perf_counter()
    estates = 0
    seen: set[int] = set()
    ranges = [range(min(MAX_COUNT.get(k, 2), 2) + 1) for k in KINDS]
    for combo in itertools.product(*ranges):
        heirs = {k: c for k, c in zip(KINDS, combo) if c}
        if not heirs or ("husband" in heirs and "wife" in heirs):
            continue
        estates += 1
        for o in distribute(heirs):
            # outcomes are memoised; check each distinct one once
            if id(o.shares) in seen:
                continue
            seen.add(id(o.shares))
            assert sum(o.shares.values()) == 1, heirs
    for bad in ({"husband": 2}, {"father": 2}, {"mother": 2}, {"paternal_grandfather": 2}, {"husband": 1, "wife": 1}):
        with pytest.raises(ValidationError):
            distribute(bad)
    assert estates == 1_889_567
    assert time.perf_counter() - t0 < 60.0

    table = [
        ({"husband": 1, "father": 1}, "husband", F(1, 2)),
        ({"husband": 1, "son": 1}, "husband", F(1, 4)),
        ({"wife": 1, "father": 1}, "wife", F(1, 4)),
        ({"wife": 1, "son": 1}, "wife", F(1, 8)),
        ({"father": 1, "son": 1}, "father", F(1, 6)),
        ({"mother": 1, "sons_son": 1}, "mother", F(1, 6)),
        ({"daughter": 1, "full_brother": 1}, "daughter", F(1, 2)),
        ({"daughter": 2, "full_brother": 1}, "daughter", F(2, 3)),
    ]
    for heirs, heir, share in table:
        assert assign_fard(heirs)[heir] == share

    (awl,) = distribute({"husband": 1, "daughter": 2, "father": 1, "mother": 1})
    assert dict(awl.shares) == {"husband": F(3, 15), "daughter": F(8, 15), "father": F(2, 15), "mother": F(2, 15)}
    (radd,) = distribute({"mother": 1, "daughter": 1})
    assert dict(radd.shares) == {"mother": F(1, 4), "daughter": F(3, 4)}

    for disputed in ({"paternal_grandfather": 1, "full_brother": 1}, {"paternal_grandfather": 1, "full_sister": 2}, {"wife": 1}):
        outcomes = distribute(disputed)
        assert len(outcomes) >= 2
        assert {o.policy for o in outcomes} == {MadhhabPolicy.HANAFI, MadhhabPolicy.JUMHUR}
        assert all(o.total() == 1 for o in outcomes)


@criterion("AC3", "qibla bearing range, due-south case, oracle agreement, Kaaba origin")
def test_qibla_geometry():
    rng = random.Random(3)
    for _ in range(5000):
        la, lo = rng.uniform(-89.9, 89.9), rng.uniform(-180.0, 180.0)
        if abs(la - KAABA[0]) < 0.01 and abs(lo - KAABA[1]) < 0.01:
            continue
        assert 0.0 <= qibla(GeoPoint(la, lo)).bearing < 360.0
    for la in (-60.0, -30.0, 0.0, 21.0):
        assert abs(oracles.angle_diff(qibla(GeoPoint(la, KAABA[1])).bearing, 0.0)) <= 1e-9
    b = qibla(GeoPoint(21.4225, 49.8262)).bearing
    assert oracles.angle_diff(b, oracles.qibla_formula(21.4225, 49.8262)) < 0.1
    with pytest.raises(QiblaUndefined):
        qibla(GeoPoint(*KAABA))


@criterion("AC4", "prayer times ordered for |lat|<=55 over a year for every method")
def test_prayer_time_ordering():
    t0 = time.perf_counter()
    start = dt.date(2025, 1, 1)
    days = [start + dt.timedelta(days=i) for i in range(365)]
    for name in ("MWL", "Egyptian", "UmmAlQura", "ISNA"):
        method = METHODS[name]
        for lat in range(-55, 56, 5):
            point = GeoPoint(float(lat), 30.0, 120)
            for d in days:
                t = solar_schedule(point, d, method)
                assert t.is_ordered(), (name, lat, d)
                if name == "UmmAlQura":
                    assert t["isha"] - t["maghrib"] == dt.timedelta(minutes=90)
    table = {"MWL": (18.0, 17.0, None), "Egyptian": (19.5, 17.5, None), "UmmAlQura": (18.5, None, 90), "ISNA": (15.0, 15.0, None)}
    for name, row in table.items():
        m = METHODS[name]
        assert (m.fajr_angle, m.isha_angle, m.isha_minutes) == row
    assert time.perf_counter() - t0 < 30.0


@criterion("AC5", "calendar round trips over the whole table and the published anchor")
def test_calendar_round_trips():
    lo, hi = supported_range()
    d = lo
    while d <= hi:
        h = gregorian_to_hijri(d)
        assert hijri_to_gregorian(h) == d
        d += dt.timedelta(days=1)
    first, last = gregorian_to_hijri(lo), gregorian_to_hijri(hi)
    for y in range(first.year, last.year + 1):
        for m in range(1, 13):
            for day in range(1, month_length(y, m) + 1):
                h = HijriDate(y, m, day)
                if (y, m, day) < (first.year, first.month, first.day) or (y, m, day) > (last.year, last.month, last.day):
                    continue
                assert gregorian_to_hijri(hijri_to_gregorian(h)) == h
    anchor = dt.date.fromisoformat(oracles.PUBLISHED_MUHARRAM_1[1447])
    assert anchor == dt.date(2025, 6, 26)
    assert gregorian_to_hijri(anchor) == HijriDate(1447, 1, 1)
    assert hijri_to_gregorian(HijriDate(1447, 1, 1)) == anchor


@criterion("AC6", "Quran ingestion, names, references, byte fidelity, SQL guard, denotational match")
def test_quran_store(tmp_path):
    report = ingest_quran(tmp_path / "q.sqlite")
    assert (report.surahs, report.verses) == (114, 6236)
    from deenkit.quran import QuranStore

    store = QuranStore(tmp_path / "q.sqlite")
    keys = [(r.surah, r.ayah) for r in store.all_records()]
    assert len(keys) == len(set(keys)) == 6236
    for s in bundled_surahs():
        assert resolve_surah(s.name_en) == s.number and resolve_surah(s.name_ar) == s.number
    ref = parse_reference("2:275")
    assert citation_url(ref.surah, ref.start) == "https://quran.com/2/275"

    import gzip

    raw = gzip.decompress(resources.files("deenkit.data").joinpath("quran_verses.tsv.gz").read_bytes()).decode("utf-8")
    src = hashlib.sha256("".join(ln + "\n" for ln in raw.splitlines() if ln).encode()).hexdigest()
    got = hashlib.sha256()
    for s in bundled_surahs():
        for r in fetch_verses(VerseRef(s.number, 1, s.verses), store).records:
            got.update(f"{r.surah}\t{r.ayah}\t{r.ayah_text}\t{r.translation}\n".encode())
    assert got.hexdigest() == src

    attacks = read_jsonl("sql_attacks.jsonl")
    assert len(attacks) == 20
    for a in attacks:
        with pytest.raises(SqlRejected):
            validate_sql(a["sql"])

    gold = read_jsonl("nl2sql_gold.jsonl")
    pred = {r["id"]: r["sql"] for r in read_jsonl("nl2sql_pred.jsonl")}
    assert len(gold) == 30
    for rec in gold:
        g, p = rec["sql"], pred[rec["id"]]
        assert denotational_match(g, g, store) == "correct"
        try:
            validate_sql(p)
        except SqlRejected:
            continue
        assert denotational_match(p, p, store) == "correct"
        assert denotational_match(p, g, store) == denotational_match(g, p, store)
    store.close()


@criterion("AC7", "router margin confidence, fallback paths, determinism, evaluation protocol")
def test_router_properties():
    rng = random.Random(7)
    for _ in range(2000):
        s = rng.uniform(-1, 1)
        assert margin_confidence(s, s) == 0.5
        a, b, c = (rng.uniform(-1, 1) for _ in range(3))
        lo, hi = sorted((b, c))
        assert margin_confidence(a, hi) <= margin_confidence(a, lo)
        assert 0.0 <= margin_confidence(rng.uniform(-5, 5), rng.uniform(-5, 5)) <= 1.0

    emb = TrigramEmbedder()
    q = "What is the dua for entering the house?"
    for scripted in ("{not json", '{"question_type": "dua_lookup", "confidence": 0.2}', RuntimeError("down")):
        assert Router(ScriptedTextGenerator({"router": scripted}), emb).classify(q).origin == "fallback"

    router = Router(FailingTextGenerator(), emb)
    for text in ["x", "؟", "123", "zakat " * 50, "مرحبا", "🙂", q]:
        assert router.classify(text) == router.classify(text)

    records = [json.loads(ln) for ln in resources.files("deenkit.data").joinpath("router_eval.jsonl").read_text(encoding="utf-8").splitlines() if ln.strip()]
    assert len(records) == 50
    report = evaluate_router(Router(ScriptedTextGenerator({}), emb).classify, records)
    correct = sum(1 for r in records if Router(ScriptedTextGenerator({}), emb).classify(r["query"]).intent.value == r["intent"])
    assert report["correct"] == correct and report["accuracy"] == correct / 50
    print(f"router accuracy on the bundled set: {report['accuracy']:.2f}")


@criterion("AC8", "config defaults and clamp ranges at every boundary")
def test_config_boundaries():
    expected_bounds = {
        "greeting.temperature": (0.0, 1.0),
        "greeting.max_tokens": (50, 1000),
        "general.temperature": (0.0, 1.0),
        "general.context_chars": (500, 100000),
        "fiqh.temperature": (0.0, 1.0),
        "fiqh.max_tokens": (2000, 12000),
        "nl2sql.temperature": (0.0, 0.5),
        "max_sources": (5, 50),
    }
    for key, bounds in expected_bounds.items():
        assert cfgmod.CONFIG_BOUNDS[key] == bounds
    assert cfgmod.load_config().as_dotted() == cfgmod.CONFIG_DEFAULTS
    for key, (lo, hi) in cfgmod.CONFIG_BOUNDS.items():
        step = 1 if isinstance(lo, int) and isinstance(cfgmod.CONFIG_DEFAULTS[key], int) else 1e-6
        for raw, want in ((lo, lo), (hi, hi), (lo - step, lo), (hi + step, hi), (lo + step, lo + step), (hi - step, hi - step)):
            assert cfgmod.load_config({key: raw}).as_dotted()[key] == want, (key, raw)
            assert cfgmod.load_config(env={cfgmod.env_name(key): str(raw)}).as_dotted()[key] == want, (key, raw)


FUZZ_TEMPLATES = [
    "Is it permissible to {x}?",
    "What is the ruling on {x}?",
    "Tell me about {x} in Islam",
    "What does the Quran say about {x}?",
    "What is the dua for {x}?",
    "ما حكم {x}؟",
    "Explain verse {v} and how it relates to {x}",
    "How much zakat do I pay on {n} dollars and {g} grams of gold?",
    "Who was {p}?",
]
FUZZ_TOPICS = ["music", "fasting while travelling", "wudu", "riba", "prayer in congregation", "eating", "sleeping", "rain", "الصلاة", "الصيام", "the Battle of Badr", "charity"]
FUZZ_PEOPLE = ["Abu Bakr", "Khadijah", "Bilal", "Umar"]


@criterion("AC9", "answers only cite existing tags; duas are stored text or the fallback")
def test_groundedness_fuzz(engine):
    rng = random.Random(99)
    stored = {render_entry(e) for e in load_duas()} | {FALLBACK_EN, FALLBACK_AR}
    for _ in range(100):
        query = rng.choice(FUZZ_TEMPLATES).format(
            x=rng.choice(FUZZ_TOPICS), v=f"{rng.randint(1, 114)}:{rng.randint(1, 5)}", n=rng.randint(1, 99999), g=rng.randint(0, 200), p=rng.choice(FUZZ_PEOPLE)
        )
        try:
            out = engine.serve_ask(query)
        except Exception as exc:  # a clean validation error is not an answer
            assert getattr(exc, "kind", None) == "validation", (query, exc)
            continue
        cites, verses = referenced_tags(out.answer)
        have_cite = {c.tag for c in out.references if c.kind == "cite"}
        have_q = {c.tag for c in out.references if c.kind == "quran"}
        assert cites <= have_cite and verses <= have_q, query
        if out.tool_metadata.get("intent", {}).get("intent") == "dua_lookup":
            assert out.answer in stored, query
    for gen in (FailingTextGenerator(), ScriptedTextGenerator({"dua_selector": "3", "dua_selector_ar": "none"})):
        eng = Engine(generator=gen, quran_store=engine.quran_store, document_store=engine.document_store)
        for q in ("What is the dua before eating?", "dua for travelling", "دعاء عند النوم", "dua for finding lost keys"):
            assert eng.dua_tool(q)["answer"] in stored


DETERMINISM_REQUESTS = [
    ("/ask", {"query": "Assalamu alaikum"}),
    ("/ask", {"query": "Is it permissible to pray with shoes on?"}),
    ("/ask", {"query": "What does 2:255 say?"}),
    ("/ask", {"query": "When is Eid al-Adha?", "date": "2025-03-10"}),
    ("/ask", {"query": "Prayer times in Cairo", "date": "2025-03-10"}),
    ("/ask", {"query": "My husband died leaving me, his mother and 2 daughters. Estate 90000."}),
    ("/zakat", {"cash": "12000", "gold_grams": "40", "gold_price": "75", "silver_price": "0.9"}),
    ("/dua", {"query": "dua before sleeping"}),
    ("/quran", {"query": "How many verses are in Surah Yasin?"}),
]


@criterion("AC10", "service responses are byte-identical serially and concurrently")
def test_end_to_end_determinism(client):
    def hit(path, body):
        return client.post(path, json=body).content

    baseline = [hit(p, b) for p, b in DETERMINISM_REQUESTS]
    assert [hit(p, b) for p, b in DETERMINISM_REQUESTS] == baseline

    results: dict[int, list[bytes]] = {i: [] for i in range(len(DETERMINISM_REQUESTS))}
    lock = threading.Lock()

    def worker(order):
        for i in order:
            body = hit(*DETERMINISM_REQUESTS[i])
            with lock:
                results[i].append(body)

    rng = random.Random(10)
    threads = []
    for _ in range(8):
        order = list(range(len(DETERMINISM_REQUESTS))) * 2
        rng.shuffle(order)
        threads.append(threading.Thread(target=worker, args=(order,)))
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for i, bodies in results.items():
        assert len(bodies) == 16
        assert all(b == baseline[i] for b in bodies), DETERMINISM_REQUESTS[i]
