"""Deterministic scripted backend for desk-scale runs and tests.

Script files are JSON lines, each ``{"fingerprint": ..., "kind": "chat" |
"score", "reply": ...}``. Chat replies are strings; score replies are
``{"token_logprobs": [...], "token_texts": [...]}`` (``token_texts`` may be
omitted, in which case the target is split into that many chunks).

Requests whose fingerprint is not in the table fall through per mode:

- chat_mode "echo" replies with a deterministic echo of the last message;
  "strict" raises :class:`RefusalError`.
- score_mode "uniform" scores every token at ``ln(uniform_p)``; "hashed"
  derives stable pseudo-random log-probabilities from the fingerprint;
  "strict" raises :class:`RefusalError`.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from pathlib import Path

from .base import (
    ChatRequest,
    LlmBackend,
    RefusalError,
    ScoreRequest,
    ScoreResponse,
    ScriptParseError,
    chat_fingerprint,
    score_fingerprint,
    simple_tokenize,
)

CHAT_MODES = ("echo", "strict")
SCORE_MODES = ("uniform", "hashed", "strict")


def _split_target(target: str, n: int) -> list[str]:
    if n <= 0 or len(target) < n:
        raise RefusalError(f"cannot split a {len(target)}-char target into {n} token texts")
    parts = [target[i] for i in range(n - 1)]
    parts.append(target[n - 1 :])
    return parts


class ScriptedBackend(LlmBackend):
    name = "scripted-mock"
    supports_scoring = True

    def __init__(
        self,
        chat_table: dict[str, str] | None = None,
        score_table: dict[str, dict] | None = None,
        chat_mode: str = "echo",
        score_mode: str = "uniform",
        uniform_p: float = 0.5,
        seed: int = 0,
    ):
        if chat_mode not in CHAT_MODES:
            raise ValueError(f"chat_mode must be one of {CHAT_MODES}")
        if score_mode not in SCORE_MODES:
            raise ValueError(f"score_mode must be one of {SCORE_MODES}")
        if not 0 < uniform_p <= 1:
            raise ValueError("uniform_p must be in (0, 1]")
        self.chat_table = dict(chat_table or {})
        self.score_table = dict(score_table or {})
        self.chat_mode = chat_mode
        self.score_mode = score_mode
        self.uniform_p = uniform_p
        self.seed = seed

    def chat(self, req: ChatRequest) -> str:
        fp = chat_fingerprint(req.messages, req.sampling.seed)
        if fp in self.chat_table:
            return self.chat_table[fp]
        if self.chat_mode == "strict":
            raise RefusalError(f"no scripted chat reply for fingerprint {fp}")
        last = req.messages[-1][1]
        return f"echo {fp}: {last[:160]}"

    def score(self, req: ScoreRequest) -> ScoreResponse:
        fp = score_fingerprint(req.prompt, req.target)
        if fp in self.score_table:
            entry = self.score_table[fp]
            logprobs = [float(lp) for lp in entry["token_logprobs"]]
            texts = entry.get("token_texts")
            if texts is None:
                texts = _split_target(req.target, len(logprobs))
            return ScoreResponse(token_logprobs=logprobs, token_texts=list(texts))
        if self.score_mode == "strict":
            raise RefusalError(f"no scripted score reply for fingerprint {fp}")
        tokens = simple_tokenize(req.target)
        if self.score_mode == "uniform":
            lp = math.log(self.uniform_p)
            return ScoreResponse(token_logprobs=[lp] * len(tokens), token_texts=tokens)
        logprobs = [self._hashed_logprob(fp, i) for i in range(len(tokens))]
        return ScoreResponse(token_logprobs=logprobs, token_texts=tokens)

    def _hashed_logprob(self, fp: str, index: int) -> float:
        digest = hashlib.sha256(f"{fp}:{index}:{self.seed}".encode("utf-8")).hexdigest()
        frac = int(digest[:8], 16) / 0xFFFFFFFF
        return -0.05 - 2.95 * frac


def mock_from_script(
    path: str | Path,
    chat_mode: str = "echo",
    score_mode: str = "uniform",
    uniform_p: float = 0.5,
) -> ScriptedBackend:
    """Load a JSONL script into a :class:`ScriptedBackend`.

    Raises :class:`ScriptParseError` on malformed lines, unknown kinds, or a
    duplicate fingerprint within a kind.
    """
    chat_table: dict[str, str] = {}
    score_table: dict[str, dict] = {}
    with Path(path).open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScriptParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(entry, dict):
                raise ScriptParseError(f"{path}:{lineno}: entry must be an object")
            fp = entry.get("fingerprint")
            kind = entry.get("kind")
            if not isinstance(fp, str) or not fp:
                raise ScriptParseError(f"{path}:{lineno}: missing fingerprint")
            if kind == "chat":
                if fp in chat_table:
                    raise ScriptParseError(f"{path}:{lineno}: duplicate chat fingerprint {fp}")
                reply = entry.get("reply")
                if not isinstance(reply, str):
                    raise ScriptParseError(f"{path}:{lineno}: chat reply must be a string")
                chat_table[fp] = reply
            elif kind == "score":
                if fp in score_table:
                    raise ScriptParseError(f"{path}:{lineno}: duplicate score fingerprint {fp}")
                reply = entry.get("reply")
                if not isinstance(reply, dict) or "token_logprobs" not in reply:
                    raise ScriptParseError(f"{path}:{lineno}: score reply needs token_logprobs")
                score_table[fp] = reply
            else:
                raise ScriptParseError(f"{path}:{lineno}: unknown kind {kind!r}")
    return ScriptedBackend(
        chat_table=chat_table,
        score_table=score_table,
        chat_mode=chat_mode,
        score_mode=score_mode,
        uniform_p=uniform_p,
    )


class RecordingBackend(LlmBackend):
    """Wraps another backend and counts traffic. Handy for asserting that a
    code path made (or provably did not make) backend calls."""

    def __init__(self, inner: LlmBackend):
        self.inner = inner
        self.chat_calls: list[ChatRequest] = []
        self.score_calls: list[ScoreRequest] = []
        self._lock = threading.Lock()

    @property
    def name(self) -> str:  # type: ignore[override]
        return f"recording({self.inner.name})"

    @property
    def supports_scoring(self) -> bool:  # type: ignore[override]
        return self.inner.supports_scoring

    @property
    def total_calls(self) -> int:
        return len(self.chat_calls) + len(self.score_calls)

    def chat(self, req: ChatRequest) -> str:
        with self._lock:
            self.chat_calls.append(req)
        return self.inner.chat(req)

    def score(self, req: ScoreRequest) -> ScoreResponse:
        with self._lock:
            self.score_calls.append(req)
        return self.inner.score(req)
