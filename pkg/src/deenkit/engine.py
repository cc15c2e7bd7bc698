"""Request orchestration: gate, classify, route, execute, assemble.

``Engine`` owns the shared read-only stores and the providers. Everything
request-scoped (trace, per-request config) is created inside ``serve_ask`` or
the direct tool methods, so one engine can serve concurrent requests.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Any, Callable, Mapping, Protocol

from . import faraid, hijri, prayer, quran, retrieval, zakat
from .config import EngineConfig, load_config
from .core import AssembledResponse, Citation, ExecutionTrace, StepClock, ValidationError, assemble_response
from .dua import DuaStore, load_duas
from .greeting import greet
from .providers import (
    Embedder,
    HttpEmbedder,
    HttpTextGenerator,
    StubTextGenerator,
    TextGenerator,
    TrigramEmbedder,
)
from .router import IntentLabel, Router, RouterDecision, route
from .text import detect_language, normalize

DEFAULT_GATE_THRESHOLD = 0.66
NON_QURAN = frozenset(retrieval.COLLECTIONS) - {"quran"}

OUT_OF_SCOPE_EN = (
    "I am an assistant for Islamic questions, so I cannot help with this one. "
    "Feel free to ask about prayer, the Quran, zakat, inheritance or other Islamic topics."
)
OUT_OF_SCOPE_AR = "أنا مساعد مختص بالأسئلة الإسلامية ولا أستطيع المساعدة في هذا السؤال. يمكنك السؤال عن الصلاة أو القرآن أو الزكاة أو المواريث."

ESTATE_CLARIFY_EN = (
    "Please list the surviving heirs (for example: husband, 2 daughters, father, mother) "
    "and optionally the net estate value after debts and bequests."
)
ESTATE_CLARIFY_AR = "يرجى ذكر الورثة الأحياء (مثل: زوج، بنتان، أب، أم) وقيمة التركة الصافية بعد الديون والوصايا إن أمكن."


class EngineError(Exception):
    """A request failed at ``stage``; ``kind`` is "validation" or "internal"."""

    def __init__(self, message: str, stage: str, route: str | None = None, kind: str = "validation", request_id: str = ""):
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.route = route
        self.kind = kind
        self.request_id = request_id
        self.trace: ExecutionTrace | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": {"kind": self.kind, "message": self.message, "stage": self.stage, "route": self.route},
            "request_id": self.request_id,
            "trace": self.trace.to_dict() if self.trace else None,
        }


# --- gate ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class GateScore:
    score: float
    threshold: float = DEFAULT_GATE_THRESHOLD
    is_islamic: bool = True
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"score": self.score, "threshold": self.threshold, "is_islamic": self.is_islamic, "note": self.note}


class GateScorer(Protocol):
    def score(self, query: str) -> float: ...


_EN_LEXICON = (
    "allah god islam islamic muslim muslims quran koran surah sura ayah ayat verse verses prophet muhammad "
    "hadith sunnah sunna fiqh fatwa sharia halal haram makruh mustahabb salah salat prayer prayers pray namaz "
    "fajr dhuhr zuhr asr maghrib isha witr tahajjud jumuah jummah wudu ablution ghusl tayammum qibla kaaba "
    "mosque masjid imam zakat zakah sadaqah nisab ramadan fasting fast sawm suhoor iftar eid hajj umrah "
    "hijri muharram safar rajab shaban shawwal dhul ashura mawlid laylat inheritance inherit heirs heir estate "
    "faraid will dua duaa supplication dhikr adhkar tafsir caliph caliphate sahaba companions madhhab "
    "hanafi maliki shafii hanbali riba interest nikah marriage divorce talaq iddah mahr jannah jahannam "
    "akhirah angels jinn salam assalamu alaikum salaam ramadhan quranic bismillah insha inshallah mashallah "
    "alhamdulillah hello hi peace thanks died deceased grandfather grandmother bequest ruling rulings badr uhud seerah sirah "
    "bakr umar uthman khadija khadijah aisha fatima bilal hijra hijrah makkah mecca madinah medina"
).split()
_AR_LEXICON = [
    normalize(w)
    for w in (
        "الله إسلام مسلم قرآن القران سورة آية الآية نبي النبي رسول حديث سنة فقه فتوى شريعة حلال حرام صلاة الصلاة "
        "الفجر الظهر العصر المغرب العشاء وضوء غسل قبلة القبلة الكعبة مسجد إمام زكاة زكاتي صدقة نصاب رمضان صوم "
        "صيام عيد حج عمرة هجري الهجري محرم شعبان شوال ذو الحجة عاشوراء ميراث الميراث ورثة تركة التركة دعاء أدعية "
        "ذكر أذكار تفسير خليفة صحابة مذهب ربا نكاح زواج طلاق الجنة النار السلام عليكم مرحبا شكرا صلا يجوز حكم"
    ).split()
]
_EN_RX = re.compile(r"(?<!\w)(?:" + "|".join(sorted(map(re.escape, _EN_LEXICON), key=len, reverse=True)) + r")(?!\w)")
_AR_RX = re.compile(r"(?<!\w)(?:و|ف|ب|ل|ال)*(?:" + "|".join(sorted(map(re.escape, _AR_LEXICON), key=len, reverse=True)) + r")")
_VERSE_LIKE = re.compile(r"\b\d{1,3}\s*:\s*\d{1,3}\b")


class KeywordGateScorer:
    """Offline stand-in for a trained binary classifier: 1.0 on an Islamic lexicon hit, else 0.0."""

    def score(self, query: str) -> float:
        text = normalize(query)
        if _EN_RX.search(text) or _AR_RX.search(text) or _VERSE_LIKE.search(query):
            return 1.0
        return 0.0


def gate(query: str, scorer: GateScorer | None = None, threshold: float = DEFAULT_GATE_THRESHOLD, trace: ExecutionTrace | None = None) -> GateScore:
    """Islamic vs non-Islamic decision; fails open when the scorer errors."""
    scorer = scorer or KeywordGateScorer()
    try:
        s = float(scorer.score(query))
    except Exception as exc:
        if trace is not None:
            trace.warn("gate", f"scorer failed: {exc}; routing to the engine")
        return GateScore(1.0, threshold, True, "scorer failed; fail-open")
    s = min(max(s, 0.0), 1.0)
    result = GateScore(s, threshold, s >= threshold)
    if trace is not None:
        trace.add("gate", f"score {s:.2f} vs threshold {threshold:.2f}: {'islamic' if result.is_islamic else 'out of scope'}")
    return result


# --- request ------------------------------------------------------------------------------


@dataclass(frozen=True)
class AskRequest:
    query: str
    language: str | None = None
    policy: str | None = None
    location: str | None = None
    overrides: Mapping[str, Any] = field(default_factory=dict)
    request_id: str | None = None
    date: dt.date | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.query, str) or not self.query.strip():
            raise ValidationError("query must be a non-empty string")
        if self.language not in (None, "ar", "en"):
            raise ValidationError("language must be 'ar' or 'en'")
        if self.policy is not None:
            try:
                faraid.MadhhabPolicy(self.policy)
            except ValueError:
                raise ValidationError(f"policy must be one of {[p.value for p in faraid.MadhhabPolicy]}") from None

    def fingerprint(self) -> str:
        body = json.dumps(
            {
                "q": self.query,
                "lang": self.language,
                "policy": self.policy,
                "loc": self.location,
                "ov": dict(self.overrides),
                "date": self.date.isoformat() if self.date else None,
            },
            sort_keys=True,
            ensure_ascii=False,
            default=str,
        )
        return hashlib.sha256(body.encode("utf-8")).hexdigest()[:16]


def build_providers(config: EngineConfig) -> tuple[TextGenerator, Embedder]:
    """HTTP providers when base URLs are configured, offline stubs otherwise."""
    if config.provider_base_url:
        generator: TextGenerator = HttpTextGenerator(config.provider_base_url, config.provider_model, config.provider_api_key)
    else:
        generator = StubTextGenerator()
    if config.embedder_base_url:
        embedder: Embedder = HttpEmbedder(config.embedder_base_url, config.embedder_model, 1024, config.embedder_api_key)
    else:
        embedder = TrigramEmbedder()
    return generator, embedder


class Engine:
    def __init__(
        self,
        config: EngineConfig | None = None,
        generator: TextGenerator | None = None,
        embedder: Embedder | None = None,
        geocoder: prayer.Geocoder | None = None,
        gate_scorer: GateScorer | None = None,
        deterministic: bool | None = None,
        today: Callable[[], dt.date] = dt.date.today,
        quran_store: quran.QuranStore | None = None,
        document_store: retrieval.DocumentStore | None = None,
        dua_store: DuaStore | None = None,
    ):
        self.config = config or EngineConfig()
        default_gen, default_emb = build_providers(self.config)
        self.generator = generator or default_gen
        self.embedder = embedder or default_emb
        if geocoder is None and self.config.geocoder_base_url:
            geocoder = prayer.HttpGeocoder(self.config.geocoder_base_url)
        self.geocoder = geocoder
        self.gate_scorer = gate_scorer or KeywordGateScorer()
        if deterministic is None:
            deterministic = isinstance(self.generator, StubTextGenerator) and isinstance(self.embedder, TrigramEmbedder)
        # stub providers: request ids derive from the request and the trace clock counts steps
        self.deterministic = deterministic
        self.today = today
        self.router = Router(self.generator, self.embedder)
        self._quran_store = quran_store
        self._document_store = document_store
        self._dua_store = dua_store
        self._lock = threading.Lock()

    # lazily built shared stores; read-only once built
    @property
    def quran_store(self) -> quran.QuranStore:
        with self._lock:
            if self._quran_store is None:
                self._quran_store = quran.default_store()
            return self._quran_store

    @property
    def document_store(self) -> retrieval.DocumentStore:
        with self._lock:
            if self._document_store is None:
                self._document_store = retrieval.default_document_store(self.embedder)
            return self._document_store

    @property
    def dua_store(self) -> DuaStore:
        with self._lock:
            if self._dua_store is None:
                self._dua_store = DuaStore(load_duas(), self.embedder)
            return self._dua_store

    def warm(self) -> "Engine":
        """Build every store now instead of on first use."""
        _ = self.quran_store, self.document_store, self.dua_store
        return self

    def new_trace(self, request_id: str | None = None, seed: str = "") -> ExecutionTrace:
        if request_id is None:
            request_id = hashlib.sha256(seed.encode("utf-8")).hexdigest()[:16] if self.deterministic else uuid.uuid4().hex[:16]
        clock = StepClock() if self.deterministic else time.time
        return ExecutionTrace(request_id, clock)

    def request_config(self, overrides: Mapping[str, Any]) -> EngineConfig:
        if not overrides:
            return self.config
        return load_config({**self.config.as_dotted(), **dict(overrides)})

    # --- main entry point ------------------------------------------------------------------

    def serve_ask(self, req: AskRequest | str) -> AssembledResponse:
        if isinstance(req, str):
            req = AskRequest(req)
        trace = self.new_trace(req.request_id, "ask:" + req.fingerprint())
        trace.add("request", f"query of {len(req.query)} chars")
        stage, route_name = "config", None
        try:
            config = self.request_config(req.overrides)
            query = req.query.strip()
            lang = req.language or detect_language(query)

            if config.gate_enabled:
                stage = "gate"
                verdict = gate(query, self.gate_scorer, config.gate_threshold, trace)
                if not verdict.is_islamic:
                    reply = OUT_OF_SCOPE_AR if lang == "ar" else OUT_OF_SCOPE_EN
                    return assemble_response(reply, [], trace, "out_of_scope", {"gate": verdict.to_dict()})

            stage = "classify"
            decision = self.router.classify(query, trace)
            if req.language:
                decision = replace(decision, language=req.language)
            route_name = route(decision).value
            stage = decision.intent.value
            text, citations, meta = self._dispatch(query, decision, req, config, trace)
            meta = {"intent": decision.to_dict(), **meta}
            stage = "assemble"
            return assemble_response(text, citations, trace, route_name, meta)
        except EngineError as exc:
            exc.request_id, exc.trace = trace.request_id, trace
            exc.route = exc.route or route_name
            raise
        except ValidationError as exc:
            trace.warn(stage, str(exc))
            err = EngineError(str(exc), stage, route_name, "validation", trace.request_id)
            err.trace = trace
            raise err from exc
        except Exception as exc:
            trace.warn(stage, f"{type(exc).__name__}: {exc}")
            err = EngineError(f"{type(exc).__name__}: {exc}", stage, route_name, "internal", trace.request_id)
            err.trace = trace
            raise err from exc

    def _dispatch(
        self, query: str, decision: RouterDecision, req: AskRequest, config: EngineConfig, trace: ExecutionTrace
    ) -> tuple[str, list[Citation], dict[str, Any]]:
        intent, lang = decision.intent, decision.language
        if intent is IntentLabel.GREETING:
            reply, _lang = greet(query, self.generator, config, trace)
            return reply, [], {}
        if intent is IntentLabel.ISLAMIC_CALENDAR:
            ans = hijri.answer_calendar(query, req.date or self.today(), lang, trace)
            return ans.text, [], {"calendar": ans.metadata}
        if intent is IntentLabel.PRAYER_TIMES:
            return self._prayer(query, req, config, trace, lang)
        if intent is IntentLabel.DUA_LOOKUP:
            res = self.dua_store.lookup(query, self.generator, config, trace)
            return res.text, res.citations, {"dua": res.to_dict()}
        if intent is IntentLabel.ZAKAT_CALCULATION:
            return self._zakat(query, config, trace, lang)
        if intent is IntentLabel.INHERITANCE_CALCULATION:
            return self._inheritance(query, req.policy, trace, lang)
        if intent is IntentLabel.QURAN_RETRIEVAL:
            return self._quran(query, config, trace, lang)
        if intent is IntentLabel.FIQH_RULING:
            return self._grounded("fiqh", query, config, trace, lang, NON_QURAN)
        return self._grounded("general", query, config, trace, lang, NON_QURAN)

    # --- per-route executors -------------------------------------------------------------------

    def _prayer(self, query: str, req: AskRequest, config: EngineConfig, trace: ExecutionTrace, lang: str):
        loc = prayer.resolve_location(req.location or query, self.generator, self.geocoder, trace)
        meta: dict[str, Any] = {"location": loc.to_dict()}
        note = "\n\n" + prayer.DEFAULT_LOCATION_NOTE if loc.disclaimer else ""
        if re.search(r"qibla|qiblah|kiblat|قبله|القبله", normalize(query)):
            q = prayer.qibla(loc.point)
            meta["qibla"] = {"bearing": q.bearing, "distance_km": q.distance_km}
            if lang == "ar":
                text = f"اتجاه القبلة من {loc.name}: {q.bearing:.1f}° من الشمال الجغرافي، والمسافة إلى الكعبة {q.distance_km:.0f} كم."
            else:
                text = f"Qibla from {loc.name}: {q.bearing:.1f}° from true north, {q.distance_km:.0f} km to the Kaaba."
            return text + note, [], meta
        day = req.date or self.today()
        method = prayer.get_method(config.prayer_method)
        table = prayer.solar_schedule(loc.point, day, method, config.asr_factor)
        meta["prayer_times"] = table.to_dict()
        times = table.formatted()
        names_ar = {"fajr": "الفجر", "sunrise": "الشروق", "dhuhr": "الظهر", "asr": "العصر", "maghrib": "المغرب", "isha": "العشاء"}
        if lang == "ar":
            head = f"مواقيت الصلاة في {loc.name} بتاريخ {day.isoformat()} ({method.name}):"
            rows = [f"{names_ar[k]}: {v}" for k, v in times.items()]
        else:
            head = f"Prayer times for {loc.name} on {day.isoformat()} ({method.name} method):"
            rows = [f"{k.capitalize()}: {v}" for k, v in times.items()]
        return head + "\n" + "\n".join(rows) + note, [], meta

    def _zakat(self, query: str, config: EngineConfig, trace: ExecutionTrace, lang: str):
        req = zakat.extract_parameters(query, self.generator, config, trace, lang)
        if isinstance(req, zakat.ClarificationRequest):
            return req.message, [], {"zakat": req.to_dict()}
        out = zakat.compute_zakat(req.assets, req.liabilities, req.prices, req.currency, req.warnings)
        trace.add("zakat", f"due on wealth {out.monetary_due}")
        return out.render(), [], {"zakat": out.to_dict()}

    def _inheritance(self, query: str, policy: str | None, trace: ExecutionTrace, lang: str):
        found = faraid.extract_estate(query, self.generator, trace)
        if not found.heirs:
            return (ESTATE_CLARIFY_AR if lang == "ar" else ESTATE_CLARIFY_EN), [], {"inheritance": {"clarification": True}}
        for note in found.notes:
            trace.add("inheritance", note)
        outcomes = faraid.distribute(found.heirs, policy)
        trace.add("inheritance", f"{len(outcomes)} outcome(s)")
        return render_outcomes(outcomes, found.net_estate, found.notes), [], {
            "inheritance": {
                "heirs": found.heirs,
                "net_estate": str(found.net_estate) if found.net_estate is not None else None,
                "outcomes": [o.to_dict(found.net_estate) for o in outcomes],
            }
        }

    def _quran(self, query: str, config: EngineConfig, trace: ExecutionTrace, lang: str):
        subtype = quran.classify_subtype(query, self.generator, self.embedder, trace)
        if subtype is quran.QuranSubtype.INTERPRETATION:
            text, cites, meta = self._grounded("general", query, config, trace, lang, None, anchor_verses=True)
            return text, cites, {"quran_subtype": subtype.value, **meta}
        ans = quran.answer_quran(query, subtype, self.quran_store, self.generator, trace=trace, lang=lang)
        return ans.text, ans.citations, {"quran_subtype": subtype.value, **ans.metadata}

    def _grounded(self, kind, query, config, trace, lang, collections, anchor_verses: bool = False):
        params = retrieval.RetrievalParams.from_config(config, collections)
        hits = self.document_store.retrieve(query, params, trace=trace)
        evidence = retrieval.tag_evidence(hits)
        if anchor_verses:
            evidence = retrieval.attach_verses(evidence, [_explicit_ref(query)], trace)
        if kind == "fiqh":
            ans = retrieval.answer_fiqh(query, evidence, self.generator, config, trace, lang)
        else:
            ans = retrieval.answer_general(query, evidence, self.generator, config, trace, lang)
        meta = {"retrieval": {"hits": [{"chunk_id": h.chunk.chunk_id, "score": round(h.score, 6)} for h in hits], "abstained": ans.abstained}}
        return ans.text, ans.citations, meta

    # --- direct tool access (granular endpoints) -------------------------------------------------

    def run_tool(self, name: str, body: Mapping[str, Any], fn: Callable[[ExecutionTrace], Any], request_id: str | None = None) -> dict[str, Any]:
        """Envelope ``{request_id, tool, result, trace}`` around ``fn(trace)``; failures raise ``EngineError``."""
        seed = name + ":" + json.dumps(body, sort_keys=True, ensure_ascii=False, default=str)
        trace = self.new_trace(request_id, seed)
        trace.add("request", name)
        try:
            result = fn(trace)
        except ValidationError as exc:
            trace.warn(name, str(exc))
            err = EngineError(str(exc), name, name, "validation", trace.request_id)
            err.trace = trace
            raise err from exc
        except Exception as exc:
            trace.warn(name, f"{type(exc).__name__}: {exc}")
            err = EngineError(f"{type(exc).__name__}: {exc}", name, name, "internal", trace.request_id)
            err.trace = trace
            raise err from exc
        return {"request_id": trace.request_id, "tool": name, "result": result, "trace": trace.to_dict()}

    def route_query(self, query: str, trace: ExecutionTrace) -> dict[str, Any]:
        if not isinstance(query, str) or not query.strip():
            raise ValidationError("query must be a non-empty string")
        return self.router.classify(query, trace).to_dict()

    def zakat_tool(
        self,
        assets: zakat.ZakatAssets,
        liabilities: Any = 0,
        gold_price: Any = None,
        silver_price: Any = None,
        currency: str | None = None,
        trace: ExecutionTrace | None = None,
    ) -> dict[str, Any]:
        warnings = []
        if gold_price is None or silver_price is None:
            warnings.append(f"Metal prices not given; using configured defaults (gold {self.config.gold_price_per_gram}/g, silver {self.config.silver_price_per_gram}/g).")
        prices = zakat.MetalPrices(
            gold_price if gold_price is not None else self.config.gold_price_per_gram,
            silver_price if silver_price is not None else self.config.silver_price_per_gram,
        )
        out = zakat.compute_zakat(assets, liabilities, prices, currency or self.config.currency, warnings)
        if trace is not None:
            trace.add("zakat", f"due on wealth {out.monetary_due}")
        return out.to_dict()

    def inheritance_tool(self, heirs: Any, net_estate: Any = None, policy: str | None = None, trace: ExecutionTrace | None = None) -> dict[str, Any]:
        net = zakat.to_decimal(net_estate, "net_estate") if net_estate is not None else None
        if net is not None and net < 0:
            raise ValidationError("net_estate must be >= 0")
        outcomes = faraid.distribute(heirs, policy)
        if trace is not None:
            trace.add("inheritance", f"{len(outcomes)} outcome(s)")
        return {"outcomes": [o.to_dict(net) for o in outcomes], "rendered": render_outcomes(outcomes, net)}

    def quran_tool(self, query: str, subtype: str | None = None, trace: ExecutionTrace | None = None) -> dict[str, Any]:
        trace = trace if trace is not None else ExecutionTrace()
        if not isinstance(query, str) or not query.strip():
            raise ValidationError("query must be a non-empty string")
        lang = detect_language(query)
        if subtype is None:
            kind = quran.classify_subtype(query, self.generator, self.embedder, trace)
        else:
            try:
                kind = quran.QuranSubtype(subtype)
            except ValueError:
                raise ValidationError(f"subtype must be one of {[k.value for k in quran.QuranSubtype]}") from None
        if kind is quran.QuranSubtype.INTERPRETATION:
            text, cites, meta = self._grounded("general", query, self.config, trace, lang, None, anchor_verses=True)
            return {"subtype": kind.value, "answer": text, "references": [c.to_dict() for c in cites], "metadata": meta}
        ans = quran.answer_quran(query, kind, self.quran_store, self.generator, trace=trace, lang=lang)
        return {
            "subtype": kind.value,
            "answer": ans.text,
            "references": [c.to_dict() for c in ans.citations],
            "metadata": ans.metadata,
            "verses": [v.to_dict() for v in ans.verses],
        }

    def _place(self, lat: float | None, lon: float | None, tz_minutes: int | None, location: str | None, trace: ExecutionTrace) -> prayer.LocationResolution:
        if lat is not None and lon is not None:
            tz = tz_minutes if tz_minutes is not None else int(round(lon / 15.0)) * 60
            return prayer.LocationResolution(prayer.GeoPoint(lat, lon, tz), "coordinates", False, f"{lat:.4f}, {lon:.4f}")
        if lat is not None or lon is not None:
            raise ValidationError("give both lat and lon, or a location name")
        return prayer.resolve_location(location or "", self.generator, self.geocoder, trace)

    def prayer_tool(
        self,
        lat: float | None = None,
        lon: float | None = None,
        tz_minutes: int | None = None,
        location: str | None = None,
        date: dt.date | None = None,
        method: str | None = None,
        asr_factor: int | None = None,
        trace: ExecutionTrace | None = None,
    ) -> dict[str, Any]:
        trace = trace if trace is not None else ExecutionTrace()
        loc = self._place(lat, lon, tz_minutes, location, trace)
        m = prayer.get_method(method or self.config.prayer_method)
        if asr_factor not in (None, 1, 2):
            raise ValidationError("asr_factor must be 1 or 2")
        table = prayer.solar_schedule(loc.point, date or self.today(), m, asr_factor or self.config.asr_factor)
        return {"location": loc.to_dict(), **table.to_dict()}

    def qibla_tool(self, lat: float | None = None, lon: float | None = None, location: str | None = None, trace: ExecutionTrace | None = None) -> dict[str, Any]:
        trace = trace if trace is not None else ExecutionTrace()
        loc = self._place(lat, lon, 0, location, trace)
        q = prayer.qibla(loc.point)
        return {"location": loc.to_dict(), "bearing": q.bearing, "distance_km": q.distance_km}

    def calendar_tool(
        self,
        query: str | None = None,
        gregorian: dt.date | None = None,
        hijri_date: str | None = None,
        trace: ExecutionTrace | None = None,
    ) -> dict[str, Any]:
        trace = trace if trace is not None else ExecutionTrace()
        if gregorian is not None:
            h = hijri.gregorian_to_hijri(gregorian)
            return {"gregorian": gregorian.isoformat(), "hijri": h.isoformat(), "text": f"{h.format()} / {h.format('ar')}"}
        if hijri_date is not None:
            m = re.fullmatch(r"\s*(\d{3,4})-(\d{1,2})-(\d{1,2})\s*", hijri_date)
            if not m:
                raise ValidationError("hijri date must look like 1447-01-01")
            h = hijri.HijriDate(*map(int, m.groups()))
            g = hijri.hijri_to_gregorian(h)
            return {"gregorian": g.isoformat(), "hijri": h.isoformat(), "text": f"{h.format()} = {g.isoformat()}"}
        if not query or not query.strip():
            raise ValidationError("give a query, a gregorian date or a hijri date")
        ans = hijri.answer_calendar(query, self.today(), detect_language(query), trace)
        return {"answer": ans.text, **ans.metadata}

    def dua_tool(self, query: str, trace: ExecutionTrace | None = None) -> dict[str, Any]:
        if not isinstance(query, str) or not query.strip():
            raise ValidationError("query must be a non-empty string")
        res = self.dua_store.lookup(query, self.generator, self.config, trace)
        return {"answer": res.text, "references": [c.to_dict() for c in res.citations], **res.to_dict()}


def _explicit_ref(query: str) -> str:
    """``s:a`` text for a verse named in the query, or "" when there is none."""
    try:
        ref = quran.parse_reference(query)
    except quran.QuranError:
        return ""
    if isinstance(ref, quran.VerseRef):
        return f"{ref.surah}:{ref.start}" + (f"-{ref.end}" if ref.end != ref.start else "")
    return ""


def render_outcomes(outcomes: list[faraid.DistributionOutcome], net_estate: Decimal | None, notes: tuple[str, ...] = ()) -> str:
    lines: list[str] = []
    for o in outcomes:
        title = f"{o.policy.value.capitalize()} view" if o.policy else "Distribution"
        lines.append(title + ":")
        amounts = o.amounts(net_estate) if net_estate is not None else {}
        for heir, share in o.shares.items():
            count = o.counts.get(heir, 1)
            label = heir.replace("_", " ") + (f" x{count}" if count > 1 else "")
            row = f"- {label}: {share.numerator}/{share.denominator}"
            if heir in amounts:
                row += f" = {amounts[heir].quantize(Decimal('0.01'))}"
            lines.append(row)
        if o.applied:
            lines.append("Rules applied: " + ", ".join(sorted(o.applied)))
        lines += [f"  {e}" for e in o.explanation]
        lines += [f"  {k.replace('_', ' ')} excluded: {r}" for k, r in o.blocked]
        lines.append("")
    if len(outcomes) > 1:
        lines.append("The schools differ on this case; each view is shown. Consult a scholar to choose.")
    lines += [f"Note: {n}" for n in notes]
    return "\n".join(lines).strip()
