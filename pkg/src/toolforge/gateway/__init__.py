"""Backend abstraction over chat generation and per-token logprob scoring."""

from .base import (
    BackendError,
    ChatRequest,
    LlmBackend,
    RateLimitedError,
    RefusalError,
    Sampling,
    ScoreRequest,
    ScoreResponse,
    ScoringUnsupported,
    ScriptParseError,
    TransportError,
    chat_fingerprint,
    extract_fenced_json,
    score_fingerprint,
    simple_tokenize,
)
from .limiter import Limiter
from .mock import RecordingBackend, ScriptedBackend, mock_from_script
from .autopilot import AutopilotBackend
from .http import OpenAiCompatBackend

__all__ = [
    "AutopilotBackend",
    "BackendError",
    "ChatRequest",
    "Limiter",
    "LlmBackend",
    "OpenAiCompatBackend",
    "RateLimitedError",
    "RecordingBackend",
    "RefusalError",
    "Sampling",
    "ScoreRequest",
    "ScoreResponse",
    "ScoringUnsupported",
    "ScriptParseError",
    "TransportError",
    "chat_fingerprint",
    "mock_from_script",
    "score_fingerprint",
    "simple_tokenize",
]
