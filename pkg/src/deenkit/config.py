"""Engine configuration with a three-tier lookup.

Each key is resolved from the database JSON document first, then from the
process environment, then from the hardcoded defaults below. Numeric values
outside their allowed range are clamped rather than rejected.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """A configuration value could not be parsed."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# dotted key -> (attribute, type, default, (lo, hi) or None)
_SCHEMA: dict[str, tuple[str, type, Any, tuple[float, float] | None]] = {
    "greeting.temperature": ("greeting_temperature", float, 0.2, (0.0, 1.0)),
    "greeting.max_tokens": ("greeting_max_tokens", int, 256, (50, 1000)),
    "general.temperature": ("general_temperature", float, 0.1, (0.0, 1.0)),
    "general.context_chars": ("general_context_chars", int, 6000, (500, 100000)),
    "fiqh.temperature": ("fiqh_temperature", float, 0.1, (0.0, 1.0)),
    "fiqh.max_tokens": ("fiqh_max_tokens", int, 4500, (2000, 12000)),
    "nl2sql.temperature": ("nl2sql_temperature", float, 0.1, (0.0, 0.5)),
    "max_sources": ("max_sources", int, 12, (5, 50)),
    "retrieval.min_similarity": ("min_similarity", float, 0.25, (-1.0, 1.0)),
    "retrieval.diversity_cap": ("diversity_cap", int, 3, (1, 50)),
    "retrieval.rerank": ("rerank", bool, False, None),
    "dua.top_k": ("dua_top_k", int, 5, (1, 50)),
    "dua.min_similarity": ("dua_min_similarity", float, 0.2, (-1.0, 1.0)),
    "gate.threshold": ("gate_threshold", float, 0.66, (0.0, 1.0)),
    "gate.enabled": ("gate_enabled", bool, True, None),
    "zakat.gold_price": ("gold_price_per_gram", str, "75.00", None),
    "zakat.silver_price": ("silver_price_per_gram", str, "0.90", None),
    "zakat.currency": ("currency", str, "USD", None),
    "prayer.method": ("prayer_method", str, "MWL", None),
    "prayer.asr_factor": ("asr_factor", int, 1, (1, 2)),
    "provider.base_url": ("provider_base_url", str, "", None),
    "provider.api_key": ("provider_api_key", str, "", None),
    "provider.model": ("provider_model", str, "", None),
    "embedder.base_url": ("embedder_base_url", str, "", None),
    "embedder.api_key": ("embedder_api_key", str, "", None),
    "embedder.model": ("embedder_model", str, "", None),
    "geocoder.base_url": ("geocoder_base_url", str, "", None),
}


_BOUNDED = [(attr, typ, bounds) for attr, typ, _d, bounds in _SCHEMA.values() if bounds is not None]


@dataclass(frozen=True)
class EngineConfig:
    greeting_temperature: float = 0.2
    greeting_max_tokens: int = 256
    general_temperature: float = 0.1
    general_context_chars: int = 6000
    fiqh_temperature: float = 0.1
    fiqh_max_tokens: int = 4500
    nl2sql_temperature: float = 0.1
    max_sources: int = 12
    min_similarity: float = 0.25
    diversity_cap: int = 3
    rerank: bool = False
    dua_top_k: int = 5
    dua_min_similarity: float = 0.2
    gate_threshold: float = 0.66
    gate_enabled: bool = True
    gold_price_per_gram: str = "75.00"
    silver_price_per_gram: str = "0.90"
    currency: str = "USD"
    prayer_method: str = "MWL"
    asr_factor: int = 1
    provider_base_url: str = ""
    provider_api_key: str = field(default="", repr=False)
    provider_model: str = ""
    embedder_base_url: str = ""
    embedder_api_key: str = field(default="", repr=False)
    embedder_model: str = ""
    geocoder_base_url: str = ""
    # keys seen in db_json that the engine does not know about
    ignored_keys: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        # out-of-range values are clamped, never rejected
        for attr, typ, bounds in _BOUNDED:
            value = getattr(self, attr)
            new = min(max(value, typ(bounds[0])), typ(bounds[1]))
            if new != value:
                object.__setattr__(self, attr, new)

    def clamped(self) -> "EngineConfig":
        """Already clamped at construction; kept for symmetry with ``load_config``."""
        return replace(self)

    def as_dotted(self) -> dict[str, Any]:
        return {key: getattr(self, attr) for key, (attr, *_rest) in _SCHEMA.items()}


def env_name(key: str) -> str:
    """``fiqh.max_tokens`` -> ``FIQH_MAX_TOKENS``."""
    return key.replace(".", "_").upper()


def _flatten(doc: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def _coerce(key: str, typ: type, raw: Any) -> Any:
    try:
        if typ is bool:
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            if isinstance(raw, bool):
                raise ValueError(raw)
            if isinstance(raw, float):
                if not raw.is_integer():
                    raise ValueError(raw)
                return int(raw)
            return int(str(raw).strip())
        if typ is float:
            if isinstance(raw, bool):
                raise ValueError(raw)
            value = float(raw)
            if value != value:
                raise ValueError(raw)
            return value
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot interpret {raw!r} as {typ.__name__}") from None


def load_config(db_json: str | Mapping[str, Any] | None = None, env: Mapping[str, str] | None = None) -> EngineConfig:
    """Resolve every key as db_json > env > default, then clamp to range.

    ``db_json`` may be a JSON string or an already-parsed mapping; nested objects
    are flattened to dotted keys. ``env`` defaults to an empty mapping (pass
    ``os.environ`` explicitly to read the process environment).
    """
    if isinstance(db_json, str):
        try:
            doc = json.loads(db_json) if db_json.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError("db_json", f"not valid JSON ({exc.msg} at position {exc.pos})") from None
        if not isinstance(doc, Mapping):
            raise ConfigError("db_json", "top level must be an object")
    else:
        doc = db_json or {}
    db = _flatten(doc)
    env = env or {}

    values: dict[str, Any] = {}
    for key, (attr, typ, _default, _bounds) in _SCHEMA.items():
        if key in db and db[key] is not None:
            values[attr] = _coerce(key, typ, db[key])
        elif env_name(key) in env:
            values[attr] = _coerce(key, typ, env[env_name(key)])
    ignored = tuple(sorted(k for k in db if k not in _SCHEMA))
    if ignored:
        logger.warning("ignoring unknown configuration keys: %s", ", ".join(ignored))
    return EngineConfig(**values, ignored_keys=ignored)


CONFIG_KEYS = tuple(_SCHEMA)
CONFIG_BOUNDS = {key: spec[3] for key, spec in _SCHEMA.items() if spec[3] is not None}
CONFIG_DEFAULTS = {key: spec[2] for key, spec in _SCHEMA.items()}
assert {f.name for f in fields(EngineConfig)} >= {spec[0] for spec in _SCHEMA.values()}
