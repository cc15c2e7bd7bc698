"""Command line interface.

Exit codes: 0 ok, 1 usage, 2 validation, 3 internal.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from pathlib import Path
from typing import Any, Callable

from . import quran, retrieval, zakat
from .config import ConfigError, EngineConfig, load_config
from .core import ValidationError
from .engine import AskRequest, Engine, EngineError
from .router import evaluate_router

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        # argparse exits with 2, which this interface reserves for validation errors
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _read_jsonl(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def parse_heirs(text: str) -> Any:
    """``husband=1,daughter=2`` or a JSON object/list."""
    text = text.strip()
    if text.startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--heirs is not valid JSON: {exc.msg}") from None
    heirs: dict[str, int] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        kind, _, count = part.partition("=")
        try:
            heirs[kind.strip()] = int(count) if count else 1
        except ValueError:
            raise ValidationError(f"bad heir count in {part!r}") from None
    return heirs


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deenkit", description="Tool-routed Islamic question answering.")
    p.add_argument("--json", action="store_true", help="print machine-readable JSON")
    p.add_argument("--config", help="JSON configuration file (overrides environment and defaults)")
    # the same flags after the subcommand; SUPPRESS keeps a pre-command value
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name: str, **kw: Any) -> argparse.ArgumentParser:
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser  # type: ignore[method-assign]

    s = sub.add_parser("ask", help="answer a free-form question through the full pipeline")
    s.add_argument("query")
    s.add_argument("--language", choices=["ar", "en"])
    s.add_argument("--policy", choices=["hanafi", "jumhur"])
    s.add_argument("--location")
    s.add_argument("--date", type=_date)

    s = sub.add_parser("route", help="show the routing decision for a query")
    s.add_argument("query")

    s = sub.add_parser("zakat", help="compute zakat on monetary assets")
    for name in ("cash", "gold-grams", "silver-grams", "business", "stocks", "liabilities"):
        s.add_argument(f"--{name}", default="0")
    s.add_argument("--gold-price")
    s.add_argument("--silver-price")
    s.add_argument("--currency")

    s = sub.add_parser("inherit", help="distribute an estate among heirs")
    s.add_argument("--heirs", required=True, help="husband=1,daughter=2 or JSON")
    s.add_argument("--estate", help="net estate after debts and bequests")
    s.add_argument("--policy", choices=["hanafi", "jumhur"])

    s = sub.add_parser("quran", help="verse lookup, full surah, statistics or interpretation")
    s.add_argument("query")
    s.add_argument("--subtype", choices=[k.value for k in quran.QuranSubtype])

    for name in ("prayer", "qibla"):
        s = sub.add_parser(name, help="prayer timetable" if name == "prayer" else "qibla bearing and distance")
        s.add_argument("--location")
        s.add_argument("--lat", type=float)
        s.add_argument("--lon", type=float)
        if name == "prayer":
            s.add_argument("--tz-minutes", type=int)
            s.add_argument("--date", type=_date)
            s.add_argument("--method")
            s.add_argument("--asr-factor", type=int, choices=[1, 2])

    s = sub.add_parser("calendar", help="Hijri conversions and Islamic events")
    s.add_argument("query", nargs="?")
    s.add_argument("--gregorian", type=_date)
    s.add_argument("--hijri", help="YYYY-MM-DD in the Hijri calendar")

    s = sub.add_parser("dua", help="look up a dua by occasion")
    s.add_argument("query")

    s = sub.add_parser("ingest-quran", help="build the verse database")
    s.add_argument("--db", required=True)
    s.add_argument("--verses", help="TSV(.gz) of surah, ayah, text, translation (default: bundled)")
    s.add_argument("--surahs", help="surah metadata TSV (default: bundled)")

    s = sub.add_parser("ingest-docs", help="validate a JSONL corpus and precompute its embeddings")
    s.add_argument("source")
    s.add_argument("--out", required=True)

    s = sub.add_parser("eval-router", help="accuracy and confusion over a labelled JSONL file")
    s.add_argument("labels")
    s.add_argument("--fallback-only", action="store_true", help="evaluate the prototype classifier alone")

    s = sub.add_parser("eval-nl2sql", help="execution accuracy of predicted SQL against gold SQL")
    s.add_argument("gold")
    s.add_argument("pred")
    s.add_argument("--db", help="verse database (default: built from the bundled corpus)")

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    return p


def _config(path: str | None) -> EngineConfig:
    doc = Path(path).read_text(encoding="utf-8") if path else None
    return load_config(doc, os.environ)


def _emit(data: Any, text: str, as_json: bool) -> None:
    if as_json:
        print(json.dumps(data, ensure_ascii=False, indent=2, default=str))
    else:
        print(text)


def _tool(engine: Engine, name: str, body: dict, fn: Callable) -> dict:
    return engine.run_tool(name, body, fn)["result"]


def run(args: argparse.Namespace) -> int:
    config = _config(args.config)
    cmd = args.command
    if cmd == "ingest-quran":
        report = quran.ingest_quran(args.db, args.verses, args.surahs)
        _emit(report.to_dict(), f"wrote {args.db}: {report.surahs} surahs, {report.verses} verses", args.json)
        return EXIT_OK
    if cmd == "ingest-docs":
        engine = Engine(config)
        meta = retrieval.ingest_docs(args.source, args.out, engine.embedder)
        _emit(meta, f"wrote {meta['chunks']} chunks with {meta['embedder']} embeddings to {args.out}", args.json)
        return EXIT_OK
    if cmd == "eval-nl2sql":
        store = quran.QuranStore(args.db) if args.db else None
        res = quran.evaluate_nl2sql(_read_jsonl(args.gold), _read_jsonl(args.pred), store)
        _emit(res, f"execution accuracy {res['correct']}/{res['total']} = {res['accuracy']:.3f}", args.json)
        return EXIT_OK
    if cmd == "serve":
        from .service import serve

        serve(args.host, args.port, Engine(config))
        return EXIT_OK

    engine = Engine(config)
    if cmd == "eval-router":
        classify = engine.router.fallback_classify if args.fallback_only else engine.router.classify
        res = evaluate_router(classify, _read_jsonl(args.labels))
        lines = [f"accuracy {res['correct']}/{res['total']} = {res['accuracy']:.3f}"]
        lines += [f"  {k}: recall {v:.2f}" for k, v in res["per_intent_recall"].items()]
        _emit(res, "\n".join(lines), args.json)
        return EXIT_OK
    if cmd == "ask":
        resp = engine.serve_ask(AskRequest(args.query, args.language, args.policy, args.location, date=args.date))
        _emit(resp.to_dict(), resp.render(), args.json)
        return EXIT_OK
    if cmd == "route":
        res = _tool(engine, "route", {"query": args.query}, lambda t: engine.route_query(args.query, t))
        _emit(res, f"{res['intent']} ({res['route']}, confidence {res['confidence']:.2f}, {res['origin']})", args.json)
        return EXIT_OK
    if cmd == "zakat":
        body = {k: getattr(args, k) for k in ("cash", "gold_grams", "silver_grams", "business", "stocks", "liabilities")}

        def _z(trace):
            assets = zakat.ZakatAssets(body["cash"], body["gold_grams"], body["silver_grams"], body["business"], body["stocks"])
            return engine.zakat_tool(assets, body["liabilities"], args.gold_price, args.silver_price, args.currency, trace)

        res = _tool(engine, "zakat", body, _z)
        text = f"Nisab {res['nisab']} {res['currency']}; net {res['net_monetary']}; zakat due {res['monetary_due']} {res['currency']}"
        text += "".join(f"\nNote: {w}" for w in res["warnings"])
        _emit(res, text, args.json)
        return EXIT_OK
    if cmd == "inherit":
        heirs = parse_heirs(args.heirs)
        res = _tool(engine, "inheritance", {"heirs": heirs, "estate": args.estate}, lambda t: engine.inheritance_tool(heirs, args.estate, args.policy, t))
        _emit(res["outcomes"], res["rendered"], args.json)
        return EXIT_OK
    if cmd == "quran":
        res = _tool(engine, "quran", {"q": args.query, "s": args.subtype}, lambda t: engine.quran_tool(args.query, args.subtype, t))
        refs = "".join(f"\n[{'Q' if r['kind'] == 'quran' else 'CITE:'}{r['tag']}] {r['source_title']} {r['source_url'] or ''}" for r in res["references"])
        _emit(res, res["answer"] + refs, args.json)
        return EXIT_OK
    if cmd == "prayer":
        res = _tool(
            engine,
            "prayer-times",
            vars(args),
            lambda t: engine.prayer_tool(args.lat, args.lon, args.tz_minutes, args.location, args.date, args.method, args.asr_factor, t),
        )
        lines = [f"{res['location']['name']} {res['date']} ({res['method']})"] + [f"{k}: {v}" for k, v in res["times"].items()]
        _emit(res, "\n".join(lines), args.json)
        return EXIT_OK
    if cmd == "qibla":
        res = _tool(engine, "qibla", vars(args), lambda t: engine.qibla_tool(args.lat, args.lon, args.location, t))
        _emit(res, f"{res['bearing']:.2f} degrees from true north, {res['distance_km']:.0f} km to the Kaaba", args.json)
        return EXIT_OK
    if cmd == "calendar":
        res = _tool(engine, "calendar", vars(args), lambda t: engine.calendar_tool(args.query, args.gregorian, args.hijri, t))
        _emit(res, res.get("answer") or res["text"], args.json)
        return EXIT_OK
    if cmd == "dua":
        res = _tool(engine, "dua", {"q": args.query}, lambda t: engine.dua_tool(args.query, t))
        refs = "".join(f"\n{r['source_title']} ({r['source_url']})" for r in res["references"])
        _emit(res, res["answer"] + refs, args.json)
        return EXIT_OK
    raise UsageError(f"unknown command {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except EngineError as exc:
        if args.json:
            print(json.dumps(exc.to_dict(), ensure_ascii=False, indent=2, default=str))
        print(f"error ({exc.stage}): {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION if exc.kind == "validation" else EXIT_INTERNAL
    except (ValidationError, ConfigError, quran.IngestionError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
