"""Deterministic, tool-routed Islamic question answering."""

__version__ = "0.1.0"

from .config import EngineConfig, load_config
from .core import AssembledResponse, Citation, ExecutionTrace, ValidationError
from .engine import AskRequest, Engine, EngineError, GateScore, gate
from .faraid import DistributionOutcome, Estate, HeirKind, MadhhabPolicy, distribute
from .hijri import HijriDate, gregorian_to_hijri, hijri_to_gregorian
from .prayer import GeoPoint, qibla, solar_schedule
from .router import IntentLabel, Router, RouterDecision, margin_confidence
from .zakat import MetalPrices, ZakatAssets, compute_zakat

__all__ = [
    "AskRequest",
    "AssembledResponse",
    "Citation",
    "DistributionOutcome",
    "Engine",
    "EngineConfig",
    "EngineError",
    "Estate",
    "ExecutionTrace",
    "GateScore",
    "GeoPoint",
    "HeirKind",
    "HijriDate",
    "IntentLabel",
    "MadhhabPolicy",
    "MetalPrices",
    "Router",
    "RouterDecision",
    "ValidationError",
    "ZakatAssets",
    "compute_zakat",
    "distribute",
    "gate",
    "gregorian_to_hijri",
    "hijri_to_gregorian",
    "load_config",
    "margin_confidence",
    "qibla",
    "solar_schedule",
]
