"""Request/response types, backend errors, and the fingerprint scheme.

Request fingerprints make scripted mocks writable by hand. The recipe:

- chat: sha256 over each message as ``role + "\\x1f" + text + "\\x1e"`` in
  order, followed by ``"seed:" + str(seed)`` (the sampling seed, ``None``
  when unset). The fingerprint is the first 16 hex digits.
- score: sha256 over ``"score\\x1e" + prompt + "\\x1f" + target``, first 16
  hex digits.

Both are exposed as functions so a test or a script author can compute the
key for any request they expect the pipeline to make.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field


class BackendError(Exception):
    """Umbrella for anything that goes wrong talking to a backend."""


class TransportError(BackendError):
    pass


class RateLimitedError(BackendError):
    pass


class RefusalError(BackendError):
    """The backend produced no usable reply (empty, blocked, or unscripted)."""


class ScoringUnsupported(BackendError):
    """The backend cannot report per-token log-probabilities."""


class ScriptParseError(Exception):
    """A mock script file is malformed."""


@dataclass
class Sampling:
    temperature: float = 0.0
    top_p: float = 1.0
    max_tokens: int = 512
    seed: int | None = None


@dataclass
class ChatRequest:
    messages: list[tuple[str, str]]
    sampling: Sampling = field(default_factory=Sampling)
    structured_hint: str | None = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("ChatRequest needs at least one message")
        if self.sampling.temperature < 0:
            raise ValueError("temperature must be nonnegative")


@dataclass
class ScoreRequest:
    prompt: str
    target: str

    def __post_init__(self) -> None:
        if not self.target:
            raise ValueError("ScoreRequest target must be nonempty")


@dataclass
class ScoreResponse:
    token_logprobs: list[float]
    token_texts: list[str]

    def __post_init__(self) -> None:
        if len(self.token_logprobs) != len(self.token_texts):
            raise ValueError("token_logprobs and token_texts must have equal length")
        for lp in self.token_logprobs:
            if lp > 0:
                raise ValueError(f"log-probability {lp} is positive")


def chat_fingerprint(messages: list[tuple[str, str]], seed: int | None = None) -> str:
    h = hashlib.sha256()
    for role, text in messages:
        h.update(role.encode("utf-8"))
        h.update(b"\x1f")
        h.update(text.encode("utf-8"))
        h.update(b"\x1e")
    h.update(f"seed:{seed}".encode("utf-8"))
    return h.hexdigest()[:16]


def score_fingerprint(prompt: str, target: str) -> str:
    h = hashlib.sha256()
    h.update(b"score\x1e")
    h.update(prompt.encode("utf-8"))
    h.update(b"\x1f")
    h.update(target.encode("utf-8"))
    return h.hexdigest()[:16]


_TOKEN_RE = re.compile(r"\S+|\s+")


def simple_tokenize(text: str) -> list[str]:
    """Whitespace-run tokenization whose pieces concatenate back to ``text``."""
    return _TOKEN_RE.findall(text)


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.S)


def extract_fenced_json(text: str):
    """First parseable fenced JSON block in a backend reply, or None.

    Structured replies throughout the pipeline travel in markdown fences;
    this is the one place that convention is decoded.
    """
    for block in _FENCE_RE.findall(text):
        try:
            return json.loads(block)
        except json.JSONDecodeError:
            continue
    return None


class LlmBackend:
    """Base backend. Subclasses override ``chat`` and, when they can report
    per-token log-probabilities, ``score`` plus ``supports_scoring``."""

    name = "backend"
    supports_scoring = False

    def chat(self, req: ChatRequest) -> str:
        raise NotImplementedError

    def score(self, req: ScoreRequest) -> ScoreResponse:
        raise ScoringUnsupported(f"{self.name} does not report token log-probabilities")
