from __future__ import annotations

import json

import httpx
import numpy as np
import pytest

from deenkit import prompts
from deenkit.prayer import HttpGeocoder, RateLimiter
from deenkit.providers import HttpEmbedder, HttpTextGenerator, ProviderError, StubTextGenerator, TrigramEmbedder


def _client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_text_generator_request_shape():
    seen = {}

    def handler(req):
        seen["url"] = str(req.url)
        seen["body"] = json.loads(req.content)
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    gen = HttpTextGenerator("http://llm/v1/", "m", client=_client(handler))
    assert gen.generate("hi", temperature=0.3, max_tokens=7) == "ok"
    assert seen["url"] == "http://llm/v1/chat/completions"
    assert seen["body"] == {"model": "m", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.3, "max_tokens": 7}


@pytest.mark.parametrize("resp", [httpx.Response(500), httpx.Response(200, json={"nope": 1})])
def test_text_generator_failures_are_provider_errors(resp):
    gen = HttpTextGenerator("http://llm", "m", client=_client(lambda req: resp))
    with pytest.raises(ProviderError):
        gen.generate("hi")


def test_embedder_normalises_and_checks_dim():
    vec = [3.0, 4.0]
    emb = HttpEmbedder("http://e", "m", 2, client=_client(lambda req: httpx.Response(200, json={"data": [{"embedding": vec}]})))
    assert np.allclose(emb.embed("x"), [0.6, 0.8])
    wrong = HttpEmbedder("http://e", "m", 3, client=_client(lambda req: httpx.Response(200, json={"data": [{"embedding": vec}]})))
    with pytest.raises(ProviderError):
        wrong.embed("x")


def test_geocoder_parses_and_swallows_errors():
    ok = HttpGeocoder("http://g", RateLimiter(1000.0), client=_client(lambda req: httpx.Response(200, json=[{"lat": "1.5", "lon": "2.5"}])))
    assert ok.geocode("somewhere") == (1.5, 2.5)
    empty = HttpGeocoder("http://g", RateLimiter(1000.0), client=_client(lambda req: httpx.Response(200, json=[])))
    assert empty.geocode("nowhere") is None
    down = HttpGeocoder("http://g", RateLimiter(1000.0), client=_client(lambda req: httpx.Response(503)))
    assert down.geocode("x") is None


def test_trigram_embedder_is_unit_and_stable():
    emb = TrigramEmbedder()
    a, b = emb.embed("prayer times"), emb.embed("prayer times")
    assert np.array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12
    assert emb.embed("prayer times") @ emb.embed("prayer time") > emb.embed("prayer times") @ emb.embed("zakat on gold")


def test_every_prompt_kind_is_recognised():
    stub = StubTextGenerator()
    for template in (prompts.ROUTER, prompts.QURAN_SUBTYPE, prompts.GREETING, prompts.FIQH_ANSWER, prompts.GENERAL_ANSWER, prompts.NL2SQL):
        kind = prompts.kind_of(prompts.render(template, question="q", evidence="", language="en"))
        assert kind != "unknown"
        assert isinstance(stub.generate(prompts.render(template, question="q", evidence="")), str)


def test_rate_limiter_spaces_calls_one_second_apart():
    now = [0.0]
    slept = []

    def sleep(s):
        slept.append(s)
        now[0] += s

    lim = RateLimiter(1.0, clock=lambda: now[0], sleep=sleep)
    for _ in range(4):
        lim.acquire()
    assert slept == [1.0, 1.0, 1.0]
