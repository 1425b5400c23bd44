"""OpenAI-compatible HTTP backend.

Chat goes to ``POST {base_url}/v1/chat/completions``. Scoring uses the
completions endpoint with echoed log-probabilities: the request sends
``prompt + target`` with ``echo`` and ``logprobs`` set and ``max_tokens`` 0,
and the target's tokens are selected by text offset. Providers that cannot
echo log-probabilities leave scoring unsupported; this backend never
approximates a score.

The API key is read from the ``TOOLFORGE_API_KEY`` environment variable
unless passed explicitly. Transient transport failures (connection errors,
429, 5xx) are retried with exponential backoff up to ``max_attempts``.
"""

from __future__ import annotations

import os
import time

import httpx

from .base import (
    ChatRequest,
    LlmBackend,
    RateLimitedError,
    RefusalError,
    ScoreRequest,
    ScoreResponse,
    ScoringUnsupported,
    TransportError,
)
from .limiter import Limiter

API_KEY_VAR = "TOOLFORGE_API_KEY"

_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class OpenAiCompatBackend(LlmBackend):
    name = "openai-compat"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        score_model: str | None = None,
        scoring: bool = False,
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        limiter: Limiter | None = None,
        transport: httpx.BaseTransport | None = None,
        sleeper=time.sleep,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.score_model = score_model or model
        self.supports_scoring = scoring
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.limiter = limiter
        self._sleeper = sleeper
        key = api_key if api_key is not None else os.environ.get(API_KEY_VAR, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(
            base_url=self.base_url, headers=headers, timeout=timeout, transport=transport
        )

    def close(self) -> None:
        self._client.close()

    def _post(self, path: str, payload: dict) -> dict:
        last_error: Exception | None = None
        rate_limited = False
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleeper(self.backoff * (2 ** (attempt - 1)))
            try:
                if self.limiter is not None:
                    self.limiter.acquire()
                try:
                    response = self._client.post(path, json=payload)
                finally:
                    if self.limiter is not None:
                        self.limiter.release()
            except httpx.HTTPError as exc:
                last_error = exc
                rate_limited = False
                continue
            if response.status_code in _RETRYABLE_STATUS:
                rate_limited = response.status_code == 429
                last_error = TransportError(f"{path} returned {response.status_code}")
                continue
            if response.status_code >= 400:
                raise TransportError(f"{path} returned {response.status_code}: {response.text[:300]}")
            try:
                return response.json()
            except ValueError as exc:
                raise TransportError(f"{path} returned unparseable JSON") from exc
        if rate_limited:
            raise RateLimitedError(f"{path} still rate limited after {self.max_attempts} attempts")
        raise TransportError(f"{path} failed after {self.max_attempts} attempts: {last_error}")

    def chat(self, req: ChatRequest) -> str:
        payload: dict = {
            "model": self.model,
            "messages": [{"role": role, "content": text} for role, text in req.messages],
            "temperature": req.sampling.temperature,
            "top_p": req.sampling.top_p,
            "max_tokens": req.sampling.max_tokens,
        }
        if req.sampling.seed is not None:
            payload["seed"] = req.sampling.seed
        body = self._post("/v1/chat/completions", payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise RefusalError("chat completion carried no message content")
        if not content:
            raise RefusalError("chat completion was empty")
        return content

    def score(self, req: ScoreRequest) -> ScoreResponse:
        if not self.supports_scoring:
            raise ScoringUnsupported(f"{self.name} was configured without a scoring endpoint")
        payload = {
            "model": self.score_model,
            "prompt": req.prompt + req.target,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
        }
        body = self._post("/v1/completions", payload)
        try:
            info = body["choices"][0]["logprobs"]
            tokens = info["tokens"]
            logprobs = info["token_logprobs"]
            offsets = info["text_offset"]
        except (KeyError, IndexError, TypeError):
            raise ScoringUnsupported("completions endpoint did not echo token log-probabilities")
        cut = len(req.prompt)
        picked_texts: list[str] = []
        picked_lps: list[float] = []
        for token, lp, offset in zip(tokens, logprobs, offsets):
            if offset >= cut:
                if lp is None:
                    raise ScoringUnsupported("provider returned null log-probability inside the target")
                picked_texts.append(token)
                picked_lps.append(min(float(lp), 0.0))
        return ScoreResponse(token_logprobs=picked_lps, token_texts=picked_texts)
