"""JSON-over-HTTP service.

Every response body carries ``request_id`` and the execution ``trace``.
Validation failures answer 422 and internal failures 500, both with the same
``{"error": {kind, message, stage, route}, "request_id", "trace"}`` shape.
"""

from __future__ import annotations

import datetime as dt
from typing import Any, Literal, Union

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, zakat
from .core import ValidationError
from .engine import AskRequest, Engine, EngineError

Number = Union[int, float, str]


class AskBody(BaseModel):
    query: str
    language: Literal["ar", "en"] | None = None
    policy: Literal["hanafi", "jumhur"] | None = None
    location: str | None = None
    overrides: dict[str, Any] = Field(default_factory=dict)
    date: dt.date | None = None


class QueryBody(BaseModel):
    query: str


class ProduceBody(BaseModel):
    kind: str
    kilograms: Number
    irrigation: Literal["natural", "artificial"] = "natural"


class LivestockBody(BaseModel):
    species: str
    head_count: int


class ZakatBody(BaseModel):
    cash: Number = 0
    gold_grams: Number = 0
    silver_grams: Number = 0
    business: Number = 0
    stocks: Number = 0
    liabilities: Number = 0
    gold_price: Number | None = None
    silver_price: Number | None = None
    currency: str | None = None
    produce: list[ProduceBody] = Field(default_factory=list)
    livestock: list[LivestockBody] = Field(default_factory=list)


class InheritanceBody(BaseModel):
    heirs: Union[dict[str, int], list[dict[str, Any]]]
    net_estate: Number | None = None
    policy: Literal["hanafi", "jumhur"] | None = None


class QuranBody(BaseModel):
    query: str
    subtype: Literal["specific_verse", "full_surah", "statistics", "interpretation"] | None = None


class PlaceBody(BaseModel):
    lat: float | None = None
    lon: float | None = None
    tz_minutes: int | None = None
    location: str | None = None


class PrayerBody(PlaceBody):
    date: dt.date | None = None
    method: str | None = None
    asr_factor: int | None = None


class CalendarBody(BaseModel):
    query: str | None = None
    gregorian: dt.date | None = None
    hijri: str | None = None


def _error(status: int, payload: dict[str, Any]) -> JSONResponse:
    return JSONResponse(status_code=status, content=payload)


def create_app(engine: Engine | None = None) -> FastAPI:
    engine = engine or Engine()
    app = FastAPI(title="deenkit", version=__version__)
    app.state.engine = engine

    @app.exception_handler(EngineError)
    async def _engine_error(_req: Request, exc: EngineError) -> JSONResponse:
        return _error(422 if exc.kind == "validation" else 500, exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def _bad_body(req: Request, exc: RequestValidationError) -> JSONResponse:
        problems = "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors())
        return _error(
            422,
            {
                "error": {"kind": "validation", "message": problems, "stage": "request", "route": req.url.path.strip("/")},
                "request_id": req.headers.get("x-request-id", ""),
                "trace": None,
            },
        )

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "version": __version__,
            "generator": type(engine.generator).__name__,
            "embedder": type(engine.embedder).__name__,
            "deterministic": engine.deterministic,
        }

    @app.post("/ask")
    def ask(body: AskBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        try:
            req = AskRequest(body.query, body.language, body.policy, body.location, body.overrides, x_request_id, body.date)
        except ValidationError as exc:
            raise EngineError(str(exc), "request", None, "validation", x_request_id or "") from exc
        return engine.serve_ask(req).to_dict()

    @app.post("/route")
    def route_(body: QueryBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool("route", body.model_dump(), lambda t: engine.route_query(body.query, t), x_request_id)

    @app.post("/zakat")
    def zakat_(body: ZakatBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        def run(trace):
            assets = zakat.ZakatAssets(
                body.cash,
                body.gold_grams,
                body.silver_grams,
                body.business,
                body.stocks,
                tuple(zakat.ProduceHolding(p.kind, p.kilograms, p.irrigation) for p in body.produce),
                tuple(zakat.LivestockHolding(h.species, h.head_count) for h in body.livestock),
            )
            return engine.zakat_tool(assets, body.liabilities, body.gold_price, body.silver_price, body.currency, trace)

        return engine.run_tool("zakat", body.model_dump(), run, x_request_id)

    @app.post("/inheritance")
    def inheritance(body: InheritanceBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool(
            "inheritance", body.model_dump(), lambda t: engine.inheritance_tool(body.heirs, body.net_estate, body.policy, t), x_request_id
        )

    @app.post("/quran")
    def quran_(body: QuranBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool("quran", body.model_dump(), lambda t: engine.quran_tool(body.query, body.subtype, t), x_request_id)

    @app.post("/prayer-times")
    def prayer_times(body: PrayerBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool(
            "prayer-times",
            body.model_dump(),
            lambda t: engine.prayer_tool(body.lat, body.lon, body.tz_minutes, body.location, body.date, body.method, body.asr_factor, t),
            x_request_id,
        )

    @app.post("/qibla")
    def qibla_(body: PlaceBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool("qibla", body.model_dump(), lambda t: engine.qibla_tool(body.lat, body.lon, body.location, t), x_request_id)

    @app.post("/calendar")
    def calendar(body: CalendarBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool(
            "calendar", body.model_dump(), lambda t: engine.calendar_tool(body.query, body.gregorian, body.hijri, t), x_request_id
        )

    @app.post("/dua")
    def dua(body: QueryBody, x_request_id: str | None = Header(default=None)) -> dict[str, Any]:
        return engine.run_tool("dua", body.model_dump(), lambda t: engine.dua_tool(body.query, t), x_request_id)

    return app


def serve(host: str = "127.0.0.1", port: int = 8000, engine: Engine | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(engine), host=host, port=port, log_level="info")
