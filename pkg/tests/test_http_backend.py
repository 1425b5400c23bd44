"""OpenAI-compatible HTTP client: retries, auth, scoring, rate limiting."""

from __future__ import annotations

import json

import httpx
import pytest

from toolforge.gateway import (
    ChatRequest,
    Limiter,
    OpenAiCompatBackend,
    RateLimitedError,
    RefusalError,
    ScoreRequest,
    ScoringUnsupported,
    TransportError,
)

BASE = "https://llm.test"


def _chat_body(content="hello back"):
    return {"choices": [{"message": {"content": content}}]}


def _backend(handler, **kwargs):
    kwargs.setdefault("transport", httpx.MockTransport(handler))
    kwargs.setdefault("sleeper", lambda s: None)
    kwargs.setdefault("api_key", "test-key")
    return OpenAiCompatBackend(base_url=BASE, model="m-chat", **kwargs)


def _req(prompt="hi"):
    return ChatRequest(messages=[("user", prompt)])


def test_chat_happy_path_and_payload_shape():
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=_chat_body("the reply"))

    backend = _backend(handler)
    assert backend.chat(_req("hi there")) == "the reply"
    assert seen["url"] == f"{BASE}/v1/chat/completions"
    assert seen["auth"] == "Bearer test-key"
    assert seen["body"]["model"] == "m-chat"
    assert seen["body"]["messages"] == [{"role": "user", "content": "hi there"}]


def test_api_key_read_from_environment(monkeypatch):
    monkeypatch.setenv("TOOLFORGE_API_KEY", "env-secret")
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json=_chat_body())

    backend = OpenAiCompatBackend(
        base_url=BASE, model="m", transport=httpx.MockTransport(handler), sleeper=lambda s: None
    )
    backend.chat(_req())
    assert seen["auth"] == "Bearer env-secret"


def test_retryable_status_then_success():
    attempts = []
    naps = []

    def handler(request):
        attempts.append(1)
        if len(attempts) < 3:
            return httpx.Response(503, text="busy")
        return httpx.Response(200, json=_chat_body("finally"))

    backend = _backend(handler, sleeper=naps.append, backoff=0.5)
    assert backend.chat(_req()) == "finally"
    assert len(attempts) == 3
    assert naps == [0.5, 1.0]  # exponential: backoff * 2^(attempt-1)


def test_persistent_429_raises_rate_limited():
    attempts = []

    def handler(request):
        attempts.append(1)
        return httpx.Response(429, text="slow down")

    backend = _backend(handler, max_attempts=3)
    with pytest.raises(RateLimitedError):
        backend.chat(_req())
    assert len(attempts) == 3


def test_client_error_fails_immediately_without_retry():
    attempts = []

    def handler(request):
        attempts.append(1)
        return httpx.Response(400, text="bad request")

    backend = _backend(handler)
    with pytest.raises(TransportError):
        backend.chat(_req())
    assert len(attempts) == 1


def test_network_error_is_wrapped():
    def handler(request):
        raise httpx.ConnectError("refused")

    backend = _backend(handler, max_attempts=2)
    with pytest.raises(TransportError):
        backend.chat(_req())


def test_empty_completion_is_a_refusal():
    def handler(request):
        return httpx.Response(200, json={"choices": [{"message": {"content": ""}}]})

    with pytest.raises(RefusalError):
        _backend(handler).chat(_req())


def test_body_without_message_content_is_a_refusal():
    def handler(request):
        return httpx.Response(200, json={"unexpected": True})

    with pytest.raises(RefusalError):
        _backend(handler).chat(_req())


def test_unparseable_body_is_transport_trouble():
    def handler(request):
        return httpx.Response(200, text="<html>gateway error</html>")

    with pytest.raises(TransportError):
        _backend(handler).chat(_req())


# ---------------------------------------------------------------------------
# scoring via echoed completion logprobs


def _score_response(prompt, target):
    # tokenization: prompt as one token, target split in two
    split = max(1, len(target) // 2)
    tokens = [prompt, target[:split], target[split:]]
    offsets = [0, len(prompt), len(prompt) + split]
    return {
        "choices": [
            {
                "logprobs": {
                    "tokens": tokens,
                    "token_logprobs": [None, -0.5, -1.5],
                    "text_offset": offsets,
                }
            }
        ]
    }


def test_score_selects_target_tokens_by_offset():
    def handler(request):
        body = json.loads(request.content)
        assert body["echo"] is True
        assert body["max_tokens"] == 0
        assert body["prompt"] == "le prompt" + "the target"
        return httpx.Response(200, json=_score_response("le prompt", "the target"))

    backend = _backend(handler, scoring=True)
    response = backend.score(ScoreRequest(prompt="le prompt", target="the target"))
    assert response.token_logprobs == [-0.5, -1.5]
    assert "".join(response.token_texts) == "the target"


def test_score_without_scoring_flag_is_unsupported():
    def handler(request):  # pragma: no cover - must never run
        raise AssertionError("no HTTP call expected")

    backend = _backend(handler, scoring=False)
    with pytest.raises(ScoringUnsupported):
        backend.score(ScoreRequest(prompt="p", target="t"))


def test_null_logprob_inside_target_is_unsupported():
    def handler(request):
        body = {
            "choices": [
                {
                    "logprobs": {
                        "tokens": ["p", "tar", "get"],
                        "token_logprobs": [None, -0.5, None],
                        "text_offset": [0, 1, 4],
                    }
                }
            ]
        }
        return httpx.Response(200, json=body)

    backend = _backend(handler, scoring=True)
    with pytest.raises(ScoringUnsupported):
        backend.score(ScoreRequest(prompt="p", target="target"))


def test_positive_logprobs_are_clamped_to_zero():
    def handler(request):
        body = {
            "choices": [
                {
                    "logprobs": {
                        "tokens": ["p", "t"],
                        "token_logprobs": [None, 0.25],
                        "text_offset": [0, 1],
                    }
                }
            ]
        }
        return httpx.Response(200, json=body)

    backend = _backend(handler, scoring=True)
    response = backend.score(ScoreRequest(prompt="p", target="t"))
    assert response.token_logprobs == [0.0]


def test_score_model_overrides_chat_model():
    seen = {}

    def handler(request):
        seen["model"] = json.loads(request.content)["model"]
        return httpx.Response(200, json=_score_response("p", "target"))

    backend = _backend(handler, scoring=True, score_model="m-score")
    backend.score(ScoreRequest(prompt="p", target="target"))
    assert seen["model"] == "m-score"


# ---------------------------------------------------------------------------
# limiter


def test_limiter_enforces_per_minute_budget():
    now = [0.0]
    naps = []

    def clock():
        return now[0]

    def sleeper(seconds):
        naps.append(seconds)
        now[0] += seconds

    limiter = Limiter(max_in_flight=4, per_minute=2, clock=clock, sleeper=sleeper)
    for _ in range(2):
        with limiter:
            pass
    assert naps == []
    with limiter:  # third call within the same minute has to wait
        pass
    assert naps and now[0] >= 60.0


def test_limiter_bounds_concurrency():
    limiter = Limiter(max_in_flight=1)
    with limiter:
        assert limiter._slots.acquire(blocking=False) is False
    assert limiter._slots.acquire(blocking=False) is True
    limiter._slots.release()


def test_backend_routes_calls_through_limiter():
    acquired = []

    class Probe(Limiter):
        def acquire(self):
            acquired.append(1)
            return super().acquire()

    def handler(request):
        return httpx.Response(200, json=_chat_body())

    backend = _backend(handler, limiter=Probe(max_in_flight=2))
    backend.chat(_req())
    assert acquired == [1]
