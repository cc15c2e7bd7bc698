from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deenkit.config import CONFIG_BOUNDS, CONFIG_DEFAULTS, CONFIG_KEYS, ConfigError, EngineConfig, env_name, load_config

BOUNDED = sorted(CONFIG_BOUNDS)


def test_defaults_match_dataclass():
    cfg = load_config()
    assert cfg == EngineConfig()
    assert cfg.as_dotted() == CONFIG_DEFAULTS


def test_db_beats_env_beats_default():
    env = {env_name("fiqh.max_tokens"): "3000", env_name("dua.top_k"): "9"}
    cfg = load_config({"fiqh": {"max_tokens": 5000}}, env)
    assert cfg.fiqh_max_tokens == 5000
    assert cfg.dua_top_k == 9
    assert cfg.max_sources == CONFIG_DEFAULTS["max_sources"]


def test_null_in_db_falls_through_to_env():
    cfg = load_config('{"max_sources": null}', {"MAX_SOURCES": "20"})
    assert cfg.max_sources == 20


@pytest.mark.parametrize("key", BOUNDED)
def test_boundaries_are_kept_and_outside_is_clamped(key):
    lo, hi = CONFIG_BOUNDS[key]
    attr = key
    assert load_config({key: lo}).as_dotted()[attr] == lo
    assert load_config({key: hi}).as_dotted()[attr] == hi
    span = hi - lo
    assert load_config({key: lo - span - 1}).as_dotted()[attr] == lo
    assert load_config({key: hi + span + 1}).as_dotted()[attr] == hi


@given(st.sampled_from(BOUNDED), st.integers(-10**6, 10**6))
def test_every_value_lands_in_range(key, raw):
    lo, hi = CONFIG_BOUNDS[key]
    got = load_config(json.dumps({key: raw})).as_dotted()[key]
    assert lo <= got <= hi
    if lo <= raw <= hi:
        assert got == raw


@given(st.sampled_from([k for k in BOUNDED if isinstance(CONFIG_DEFAULTS[k], float)]), st.floats(-1e6, 1e6, allow_nan=False))
def test_float_keys_clamp_from_env(key, raw):
    lo, hi = CONFIG_BOUNDS[key]
    got = load_config(env={env_name(key): repr(raw)}).as_dotted()[key]
    assert got == min(max(raw, lo), hi)


@pytest.mark.parametrize("doc", ["{not json", "[1, 2]", '"text"'])
def test_bad_db_json(doc):
    with pytest.raises(ConfigError):
        load_config(doc)


@pytest.mark.parametrize("key,raw", [("max_sources", "many"), ("max_sources", 2.5), ("gate.enabled", "maybe"), ("fiqh.temperature", "nan")])
def test_uninterpretable_values(key, raw):
    with pytest.raises(ConfigError) as err:
        load_config({key: raw})
    assert err.value.key == key


def test_unknown_keys_are_reported_not_applied():
    cfg = load_config({"colour": "blue", "max_sources": 7})
    assert cfg.ignored_keys == ("colour",)
    assert cfg.max_sources == 7


def test_env_names():
    assert env_name("fiqh.max_tokens") == "FIQH_MAX_TOKENS"
    assert len({env_name(k) for k in CONFIG_KEYS}) == len(CONFIG_KEYS)
