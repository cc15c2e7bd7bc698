"""Zakat: nisab, the 2.5% monetary rule, agriculture and livestock schedules.

All money and mass values are ``Decimal``; nothing passes through binary
floating point. Rounding to the currency's minor unit happens only in
``display``.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation, localcontext
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable

from . import prompts
from .config import EngineConfig
from .core import ExecutionTrace, ValidationError
from .providers import TextGenerator
from .text import ascii_digits

GOLD_NISAB_GRAMS = Decimal(85)
SILVER_NISAB_GRAMS = Decimal(595)
MONETARY_RATE = Decimal("0.025")
PRODUCE_THRESHOLD_KG = Decimal(653)
PRODUCE_RATES = {"natural": Decimal("0.10"), "artificial": Decimal("0.05")}
SPECIES = ("camel", "cattle", "sheep")

HAWL_WARNING = "Assumes each asset has been held for one full lunar year (hawl)."

# Decimal precision for intermediate products; ample for any realistic amount
_PREC = 60


def to_decimal(value: Any, name: str = "value") -> Decimal:
    if isinstance(value, Decimal):
        out = value
    elif isinstance(value, bool):
        raise ValidationError(f"{name} must be a number")
    elif isinstance(value, int):
        out = Decimal(value)
    elif isinstance(value, float):
        # the shortest repr is what the user typed
        out = Decimal(repr(value))
    elif isinstance(value, str):
        try:
            out = Decimal(value.replace(",", "").strip())
        except InvalidOperation:
            raise ValidationError(f"{name} is not a number: {value!r}") from None
    else:
        raise ValidationError(f"{name} must be a number")
    if not out.is_finite():
        raise ValidationError(f"{name} must be finite")
    return out


def display(amount: Decimal, places: int = 2) -> Decimal:
    return amount.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)


@dataclass(frozen=True)
class MetalPrices:
    gold_per_gram: Decimal
    silver_per_gram: Decimal

    def __post_init__(self) -> None:
        for name in ("gold_per_gram", "silver_per_gram"):
            v = to_decimal(getattr(self, name), name)
            if v <= 0:
                raise ValidationError(f"{name} must be strictly positive")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ProduceHolding:
    kind: str
    kilograms: Decimal
    irrigation: str = "natural"

    def __post_init__(self) -> None:
        kg = to_decimal(self.kilograms, "kilograms")
        if kg < 0:
            raise ValidationError("produce kilograms must be >= 0")
        if self.irrigation not in PRODUCE_RATES:
            raise ValidationError(f"irrigation must be one of {sorted(PRODUCE_RATES)}")
        object.__setattr__(self, "kilograms", kg)


@dataclass(frozen=True)
class LivestockHolding:
    species: str
    head_count: int

    def __post_init__(self) -> None:
        if self.species not in SPECIES:
            raise ValidationError(f"unknown species {self.species!r}; expected one of {', '.join(SPECIES)}")
        if isinstance(self.head_count, bool) or not isinstance(self.head_count, int) or self.head_count < 0:
            raise ValidationError("head_count must be a non-negative integer")


@dataclass(frozen=True)
class ZakatAssets:
    cash: Decimal = Decimal(0)
    gold_grams: Decimal = Decimal(0)
    silver_grams: Decimal = Decimal(0)
    business: Decimal = Decimal(0)
    stocks: Decimal = Decimal(0)
    produce: tuple[ProduceHolding, ...] = ()
    livestock: tuple[LivestockHolding, ...] = ()

    def __post_init__(self) -> None:
        for name in ("cash", "gold_grams", "silver_grams", "business", "stocks"):
            v = to_decimal(getattr(self, name), name)
            if v < 0:
                raise ValidationError(f"{name} must be >= 0")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "produce", tuple(self.produce))
        object.__setattr__(self, "livestock", tuple(self.livestock))


@dataclass(frozen=True)
class ZakatBreakdown:
    nisab: Decimal
    nisab_gold: Decimal
    nisab_silver: Decimal
    monetary_assets: Decimal
    net_monetary: Decimal
    monetary_due: Decimal
    agriculture_due: tuple[tuple[str, Decimal], ...]
    livestock_due: tuple[tuple[str, int, str], ...]
    total_note: str
    warnings: tuple[str, ...]
    currency: str = "USD"

    def to_dict(self) -> dict:
        return {
            "currency": self.currency,
            "nisab": str(display(self.nisab)),
            "nisab_gold": str(display(self.nisab_gold)),
            "nisab_silver": str(display(self.nisab_silver)),
            "monetary_assets": str(display(self.monetary_assets)),
            "net_monetary": str(display(self.net_monetary)),
            "monetary_due": str(display(self.monetary_due)),
            "monetary_due_exact": str(self.monetary_due),
            "agriculture_due_kg": [{"kind": k, "due_kg": str(v)} for k, v in self.agriculture_due],
            "livestock_due": [{"species": s, "head_count": n, "due": d} for s, n, d in self.livestock_due],
            "total_note": self.total_note,
            "warnings": list(self.warnings),
        }

    def render(self) -> str:
        c = self.currency
        lines = [
            f"Nisab: {display(self.nisab)} {c} (gold {display(self.nisab_gold)}, silver {display(self.nisab_silver)})",
            f"Net zakatable wealth: {display(self.net_monetary)} {c}",
            f"Zakat on wealth: {display(self.monetary_due)} {c}",
        ]
        lines += [f"Zakat on {k}: {v} kg" for k, v in self.agriculture_due]
        lines += [f"Zakat on {n} {s}: {d}" for s, n, d in self.livestock_due]
        lines.append(self.total_note)
        lines += [f"Note: {w}" for w in self.warnings]
        return "\n".join(lines)


def nisab(prices: MetalPrices) -> tuple[Decimal, Decimal, Decimal]:
    """(N, N_gold, N_silver) with N = min(85 g gold, 595 g silver)."""
    n_gold = GOLD_NISAB_GRAMS * prices.gold_per_gram
    n_silver = SILVER_NISAB_GRAMS * prices.silver_per_gram
    return min(n_gold, n_silver), n_gold, n_silver


def agriculture_zakat(holdings: Iterable[ProduceHolding]) -> list[tuple[str, Decimal]]:
    out = []
    for h in holdings:
        due = Decimal(0) if h.kilograms < PRODUCE_THRESHOLD_KG else h.kilograms * PRODUCE_RATES[h.irrigation]
        out.append((h.kind, due))
    return out


@lru_cache(maxsize=1)
def _livestock_table() -> dict[str, list[tuple[int, int, str]]]:
    text = resources.files("deenkit.data").joinpath("livestock.tsv").read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    table: dict[str, list[tuple[int, int, str]]] = {s: [] for s in SPECIES}
    for species, lo, hi, due, _note in csv.reader(lines, delimiter="\t"):
        table[species].append((int(lo), int(hi), due))
    return table


def _best_mix(n: int, small: int, large: int) -> tuple[int, int]:
    """(count of ``small`` units, count of ``large`` units) covering the most head <= n.

    Ties go to more ``large`` units.
    """
    best = (0, 0, -1)
    for b in range(n // large + 1):
        a = (n - b * large) // small
        covered = a * small + b * large
        if covered > best[2] or (covered == best[2] and b > best[1]):
            best = (a, b, covered)
    return best[0], best[1]


def _plural(count: int, name: str) -> str:
    return f"{count} {name}"


def livestock_due(species: str, head: int) -> str | None:
    """In-kind due for one herd, or None below the minimum."""
    if species not in SPECIES:
        raise ValidationError(f"unknown species {species!r}")
    for lo, hi, due in _livestock_table()[species]:
        if lo <= head <= hi:
            return due
    top = max(hi for _lo, hi, _d in _livestock_table()[species])
    if head <= top:
        return None
    if species == "sheep":
        return _plural(head // 100, "sheep")
    if species == "camel":
        a, b = _best_mix(head, 40, 50)
        parts = [p for p in (_plural(a, "bint labun") if a else "", _plural(b, "hiqqa") if b else "") if p]
        return " + ".join(parts)
    a, b = _best_mix(head, 30, 40)
    parts = [p for p in (_plural(a, "tabi'") if a else "", _plural(b, "musinnah") if b else "") if p]
    return " + ".join(parts)


def livestock_zakat(holdings: Iterable[LivestockHolding]) -> list[tuple[str, int, str]]:
    out = []
    for h in holdings:
        due = livestock_due(h.species, h.head_count)
        out.append((h.species, h.head_count, due or "nothing due"))
    return out


def compute_zakat(
    assets: ZakatAssets,
    liabilities: Decimal | int | str,
    prices: MetalPrices,
    currency: str = "USD",
    extra_warnings: Iterable[str] = (),
) -> ZakatBreakdown:
    liabilities = to_decimal(liabilities, "liabilities")
    if liabilities < 0:
        raise ValidationError("liabilities must be >= 0")
    with localcontext() as ctx:
        ctx.prec = _PREC
        n, n_gold, n_silver = nisab(prices)
        monetary = (
            assets.cash
            + assets.gold_grams * prices.gold_per_gram
            + assets.silver_grams * prices.silver_per_gram
            + assets.business
            + assets.stocks
        )
        net = monetary - liabilities
        due = MONETARY_RATE * net if net >= n else Decimal(0)
        agri = agriculture_zakat(assets.produce)
        stock = livestock_zakat(assets.livestock)

    warnings = [HAWL_WARNING, *extra_warnings]
    if 0 < net < n:
        warnings.append(f"Net wealth {display(net)} {currency} is below the nisab of {display(n)} {currency}; no zakat due on wealth.")
    if net < 0:
        warnings.append("Liabilities exceed zakatable wealth; no zakat due on wealth.")
    for kind, kg in ((h.kind, h.kilograms) for h in assets.produce):
        if kg < PRODUCE_THRESHOLD_KG:
            warnings.append(f"{kind}: {kg} kg is below the {PRODUCE_THRESHOLD_KG} kg threshold.")

    parts = [f"{display(due)} {currency} on wealth"]
    parts += [f"{v} kg of {k}" for k, v in agri if v > 0]
    parts += [f"{d} from {s}" for s, _n, d in stock if d != "nothing due"]
    total = "Total zakat: " + ", ".join(parts) + "."
    return ZakatBreakdown(n, n_gold, n_silver, monetary, net, due, tuple(agri), tuple(stock), total, tuple(warnings), currency)


# --- parameter extraction --------------------------------------------------------------


@dataclass(frozen=True)
class ZakatRequest:
    assets: ZakatAssets
    liabilities: Decimal
    prices: MetalPrices
    currency: str
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClarificationRequest:
    message: str
    needed: tuple[str, ...] = field(default=("cash", "gold_grams", "silver_grams", "business", "stocks", "liabilities"))

    def to_dict(self) -> dict:
        return {"clarification": self.message, "needed": list(self.needed)}


CLARIFY_EN = (
    "Please tell me what you own so I can calculate zakat, for example: cash savings, grams of gold "
    "or silver, business inventory, shares, and any debts you owe."
)
CLARIFY_AR = "يرجى ذكر ما تملكه لحساب الزكاة، مثل: النقود المدخرة، وغرامات الذهب أو الفضة، وعروض التجارة، والأسهم، والديون المستحقة عليك."

_CURRENCIES = [
    (re.compile(r"\$|\busd\b|dollars?|دولار"), "USD"),
    (re.compile(r"€|\beur\b|euros?|يورو"), "EUR"),
    (re.compile(r"£|\bgbp\b|pounds?|جنيه"), "GBP"),
    (re.compile(r"\bsar\b|riyals?|ريال"), "SAR"),
    (re.compile(r"\baed\b|dirhams?|درهم"), "AED"),
    (re.compile(r"\bqar\b|qatari"), "QAR"),
]
_NUMBER = re.compile(r"(\d[\d,]*(?:\.\d+)?)\s*(k\b|thousand\b|million\b|m\b|ألف|الف|مليون)?")
_MULT = {"k": 1000, "thousand": 1000, "ألف": 1000, "الف": 1000, "million": 10**6, "m": 10**6, "مليون": 10**6}

# (field, pattern) checked against the words after a number, then before it
_FIELDS: list[tuple[str, re.Pattern[str]]] = [
    ("gold_price", re.compile(r"per gram of gold|/\s*g(ram)? gold|gold price|سعر (غرام |جرام )?الذهب")),
    ("silver_price", re.compile(r"per gram of silver|/\s*g(ram)? silver|silver price|سعر (غرام |جرام )?الفضة")),
    ("gold_grams", re.compile(r"^\s*(g|grams?|gm|غرام|جرام)\b.{0,12}(gold|ذهب)|^\s*(of )?gold|^\s*(غرام|جرام)? ?(من )?(ال)?ذهب")),
    ("silver_grams", re.compile(r"^\s*(g|grams?|gm|غرام|جرام)\b.{0,12}(silver|فض)|^\s*(of )?silver|^\s*(غرام|جرام)? ?(من )?(ال)?فض")),
    ("sheep", re.compile(r"^\s*(sheep|goats?|غنم|شاة|شياه|أغنام)")),
    ("camel", re.compile(r"^\s*(camels?|إبل|ابل|جمل|جمال)")),
    ("cattle", re.compile(r"^\s*(cows?|cattle|bulls?|oxen|بقر|أبقار)")),
    ("produce", re.compile(r"^\s*(kg|kilograms?|كيلو|كغ)")),
    ("liabilities", re.compile(r"debts?|owe|loans?|liabilit|دين|ديون|قرض")),
    ("business", re.compile(r"business|inventory|merchandise|trade goods|stock in trade|تجار|بضاع")),
    ("stocks", re.compile(r"shares|stocks|equities|investments?|أسهم|اسهم")),
    ("cash", re.compile(r"cash|savings?|bank|money|نقد|نقود|مال|مدخرات|رصيد")),
]


def _parse_number(raw: str, mult: str | None) -> Decimal:
    value = Decimal(raw.replace(",", ""))
    if mult:
        value *= _MULT[mult]
    return value


def _nearest_field(before: str, after: str) -> str | None:
    """Field whose keyword sits closest to the number; ties favour the words after it."""
    best: tuple[int, int, str] | None = None
    for rank, (name, pattern) in enumerate(_FIELDS):
        anchored = pattern.pattern.startswith("^")
        m = pattern.match(after) if anchored else pattern.search(after)
        if m:
            cand = (m.start(), 0, name) if not anchored else (0, 0, name)
            if best is None or cand[:2] < best[:2]:
                best = cand
        if not anchored:
            hits = list(pattern.finditer(before))
            if hits:
                cand = (len(before) - hits[-1].end(), 1, name)
                if best is None or cand[:2] < best[:2]:
                    best = cand
    return best[2] if best else None


def regex_extract(query: str) -> dict[str, Any]:
    """Deterministic best-effort extraction of amounts from simple phrasings."""
    text = ascii_digits(query).lower()
    found: dict[str, Any] = {}
    matches = list(_NUMBER.finditer(text))
    for i, m in enumerate(matches):
        value = _parse_number(m.group(1), m.group(2))
        nxt = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        after = text[m.end() : min(nxt, m.end() + 30)]
        prv = matches[i - 1].end() if i > 0 else 0
        before = text[max(prv, m.start() - 25) : m.start()]
        field_name = _nearest_field(before, after)
        if field_name is None:
            field_name = "cash" if any(p.search(before + after) for p, _c in _CURRENCIES) or re.search(r"zakat|زكا", text) else None
        if field_name is None:
            continue
        if field_name in ("sheep", "camel", "cattle"):
            found.setdefault("livestock", []).append({"species": field_name, "head_count": int(value)})
        elif field_name == "produce":
            kind_m = re.search(r"(?:of\s+)?([a-z؀-ۿ]+)", after[after.find(" ") + 1 :] if " " in after else "")
            irrigation = "artificial" if re.search(r"irrigat|pump|well|artificial|سقي|ري ", text) else "natural"
            found.setdefault("produce", []).append(
                {"kind": kind_m.group(1) if kind_m else "produce", "kilograms": value, "irrigation": irrigation}
            )
        else:
            found[field_name] = found.get(field_name, Decimal(0)) + value
    for pattern, code in _CURRENCIES:
        if pattern.search(text):
            found["currency"] = code
            break
    return found


def _from_json(raw: str) -> dict[str, Any] | None:
    raw = raw.strip()
    if not raw or raw.lower() == "none":
        return None
    m = re.search(r"\{.*\}", raw, re.S)
    if not m:
        return None
    try:
        obj = json.loads(m.group(0))
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict):
        return None
    out: dict[str, Any] = {}
    for key in ("cash", "gold_grams", "silver_grams", "business", "stocks", "liabilities", "gold_price", "silver_price"):
        if obj.get(key) is not None:
            out[key] = to_decimal(obj[key], key)
    if isinstance(obj.get("currency"), str):
        out["currency"] = obj["currency"].upper()
    return out or None


def extract_parameters(
    query: str,
    generator: TextGenerator | None,
    config: EngineConfig,
    trace: ExecutionTrace | None = None,
    lang: str = "en",
) -> ZakatRequest | ClarificationRequest:
    trace = trace if trace is not None else ExecutionTrace()
    found: dict[str, Any] | None = None
    if generator is not None:
        try:
            raw = generator.generate(prompts.render(prompts.ZAKAT_EXTRACT, question=query), temperature=0.0, max_tokens=200)
            found = _from_json(raw)
        except ValidationError as exc:
            trace.warn("zakat", f"provider extraction invalid: {exc}")
        except Exception as exc:
            trace.warn("zakat", f"provider extraction failed: {exc}")
        if found:
            trace.add("zakat", "parameters from provider extraction")
    if not found:
        found = regex_extract(query)
        if found:
            trace.add("zakat", "parameters from regex fallback")
    amounts = {k: v for k, v in (found or {}).items() if k not in ("currency", "gold_price", "silver_price")}
    if not amounts:
        trace.add("zakat", "no parameters found; asking for clarification")
        return ClarificationRequest(CLARIFY_AR if lang == "ar" else CLARIFY_EN)

    warnings = []
    gold = found.get("gold_price")
    silver = found.get("silver_price")
    if gold is None or silver is None:
        warnings.append(
            f"Metal prices not given; using configured defaults (gold {config.gold_price_per_gram}/g, "
            f"silver {config.silver_price_per_gram}/g). Check current market prices."
        )
    prices = MetalPrices(
        gold if gold is not None else to_decimal(config.gold_price_per_gram),
        silver if silver is not None else to_decimal(config.silver_price_per_gram),
    )
    assets = ZakatAssets(
        cash=found.get("cash", 0),
        gold_grams=found.get("gold_grams", 0),
        silver_grams=found.get("silver_grams", 0),
        business=found.get("business", 0),
        stocks=found.get("stocks", 0),
        produce=tuple(ProduceHolding(**p) for p in found.get("produce", [])),
        livestock=tuple(LivestockHolding(**h) for h in found.get("livestock", [])),
    )
    if assets.produce and not re.search(r"irrigat|pump|well|artificial|rain|natural|سقي|مطر", query.lower()):
        warnings.append("Irrigation method not stated; assumed rain-fed (10%).")
    return ZakatRequest(assets, to_decimal(found.get("liabilities", 0)), prices, found.get("currency", config.currency), tuple(warnings))
