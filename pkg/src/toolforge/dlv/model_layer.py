"""The model verification layer: three judged checks plus a degeneracy scan.

Each judged check is one backend call with a structured pass/fail reply;
the three run concurrently per sample. The degenerate-text check is
deterministic and needs no backend.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..core.dialog import DataSample
from ..core.schema import ApiDefinition, api_to_record
from ..gateway.base import BackendError, ChatRequest, LlmBackend, extract_fenced_json
from ..sdg.agents import format_history

CHECKS = ("hallucination", "consistency", "tool_response", "degenerate_text")

_JUDGE_QUESTIONS = {
    "hallucination": (
        "Do any argument values in the assistant's calls come from nowhere, "
        "appearing neither in the user's messages nor in the system prompt "
        "nor in earlier tool results?"
    ),
    "consistency": (
        "Taken as a whole, do the assistant's responses actually accomplish "
        "what the user asked for in this conversation?"
    ),
    "tool_response": (
        "Do the simulated tool results conform to each called tool's "
        "declared returns schema and make sense for the call?"
    ),
}


class VerdictParseError(BackendError):
    """A judge never produced a parseable verdict; carries what did finish."""

    def __init__(self, message: str, partial: list["ModelVerdict"] | None = None):
        super().__init__(message)
        self.partial = partial or []


@dataclass(frozen=True)
class ModelVerdict:
    check: str
    passed: bool
    rationale: str

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ValueError(f"unknown check {self.check!r}")
        if not self.passed and not self.rationale:
            raise ValueError("failed verdicts need a rationale")


def degenerate_text(text: str) -> str | None:
    """Reason the text is degenerate, or None if it reads fine.

    Flags any 3-gram of word tokens covering more than 30% of the turn
    (at 8 tokens and up), and any run of one character or of non-alphanumeric
    filler longer than 16 characters.
    """
    if re.search(r"(.)\1{16,}", text):
        return "a single character repeats more than 16 times"
    if re.search(r"[^\w\s]{17,}", text):
        return "non-linguistic filler run longer than 16 characters"
    tokens = re.findall(r"\S+", text)
    if len(tokens) >= 8:
        counts: dict[tuple, int] = {}
        for i in range(len(tokens) - 2):
            gram = tuple(tokens[i : i + 3])
            counts[gram] = counts.get(gram, 0) + 1
        worst, n = max(counts.items(), key=lambda kv: kv[1])
        if n * 3 > 0.3 * len(tokens):
            return f"3-gram {' '.join(worst)!r} covers over 30% of the turn"
    return None


def judge_prompt(check: str, sample: DataSample, tools: list[ApiDefinition], attempt: int = 0) -> str:
    tools_json = json.dumps([api_to_record(t) for t in tools], ensure_ascii=False)
    marker = f"\n(retry {attempt})" if attempt else ""
    return (
        f"You are a data-quality reviewer. {_JUDGE_QUESTIONS[check]}\n\n"
        f"### task: judge_{check}\n"
        f"<tools>\n{tools_json}\n</tools>\n"
        f"<sample>\nsystem: {sample.system_prompt}\n{format_history(sample.turns)}\n</sample>\n\n"
        'Reply with a fenced json block {"passed": true|false, "rationale": "..."};'
        " the rationale is required when passed is false."
        f"{marker}"
    )


def _ask_judge(
    check: str,
    sample: DataSample,
    tools: list[ApiDefinition],
    backend: LlmBackend,
    retries: int,
) -> ModelVerdict:
    for attempt in range(retries + 1):
        reply = backend.chat(ChatRequest(messages=[("user", judge_prompt(check, sample, tools, attempt))]))
        doc = extract_fenced_json(reply)
        if not isinstance(doc, dict) or not isinstance(doc.get("passed"), bool):
            continue
        rationale = doc.get("rationale")
        rationale = rationale if isinstance(rationale, str) else ""
        if not doc["passed"] and not rationale:
            continue
        return ModelVerdict(check=check, passed=doc["passed"], rationale=rationale)
    raise VerdictParseError(f"judge {check} gave no parseable verdict in {retries + 1} attempts")


def run_model_layer(
    sample: DataSample,
    tools: list[ApiDefinition],
    backend: LlmBackend,
    retries: int = 2,
) -> list[ModelVerdict]:
    judged = ("hallucination", "consistency", "tool_response")
    with ThreadPoolExecutor(max_workers=len(judged)) as pool:
        futures = [pool.submit(_ask_judge, check, sample, tools, backend, retries) for check in judged]
        verdicts: list[ModelVerdict] = []
        failure: BackendError | None = None
        for future in futures:
            try:
                verdicts.append(future.result())
            except BackendError as exc:
                if failure is None:
                    failure = exc
    if failure is not None:
        if isinstance(failure, VerdictParseError):
            failure.partial = verdicts
        raise failure

    reasons = []
    for turn in sample.turns:
        if turn.role == "assistant" and turn.content:
            reason = degenerate_text(turn.content)
            if reason:
                reasons.append(reason)
    verdicts.append(
        ModelVerdict(
            check="degenerate_text",
            passed=not reasons,
            rationale="; ".join(reasons),
        )
    )
    return verdicts
