"""Dialog generation: the three role agents play out one conversation.

The user agent opens, the assistant agent acts (with consistency voting),
and the tool agent answers calls, until the dialog reaches its target
length. A finished draft is scored by the complexity evaluator; drafts
outside the configured range are regenerated from the opening user turn
with complicate or simplify guidance, up to a round budget.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from random import Random

from ..core.dialog import DIALOG_TYPES, DataSample, DialogTurn, dialog_type_ok
from ..core.schema import ApiDefinition
from ..gateway.base import ChatRequest, LlmBackend, extract_fenced_json
from .agents import AgentScript, assistant_step, format_history, load_scripts, tools_block
from .complexity import ComplexityRange, evaluate_complexity, guidance_for


class TypeUnsatisfied(Exception):
    """The backend never produced the demanded dialog structure."""


class _PlayFailure(Exception):
    """Internal: one playthrough went structurally wrong; retry if budget allows."""


@dataclass
class GenerationLimits:
    turns_min: int = 3
    turns_max: int = 9
    max_rounds: int = 2
    votes: int = 3
    max_steps: int = 12

    def __post_init__(self):
        if not 1 <= self.turns_min <= self.turns_max:
            raise ValueError("need 1 <= turns_min <= turns_max")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")
        if self.votes < 1 or self.votes % 2 == 0:
            raise ValueError("votes must be a positive odd count")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


SYSTEM_PROMPT = (
    "You are a function-calling assistant with access to the tools listed in "
    "this conversation. When you invoke tools, emit exactly one line of the "
    "form [name(arg=value, ...)]; several calls share one bracket pair, "
    "separated by commas. Ask for missing required details, and decline "
    "politely when no tool fits the request."
)

_OPENERS = {
    "single": "Open with a request that one of the tools can satisfy directly.",
    "parallel": "Open with a request that needs the same tool applied to several variants at once.",
    "dependent": "Open with a request whose later steps depend on what earlier tool results return.",
    "non_tool_use": "Open with a request that none of the tools can help with, or that misses required details.",
}

_STEERING = {
    "complicate": (
        "Make the request noticeably more demanding than last time; it should "
        "take more tools or more steps to finish."
    ),
    "simplify": (
        "Make the request noticeably easier than last time; it should take "
        "fewer tools or fewer steps to finish."
    ),
}

_FOLLOWUP_GUIDANCE = "Ask one short follow-up about what was just reported. <plan type=followup level=0 attempt=0/>"


def query_tool_dissimilarity(sample: DataSample) -> float:
    """Diagnostic: 1 minus the token Jaccard similarity between the first
    user turn and the concatenated tool descriptions."""
    user_text = next((t.content for t in sample.turns if t.role == "user"), "") or ""
    tool_text = " ".join(f"{t.name} {t.description}" for t in sample.tool_list)
    a = set(re.findall(r"[a-z0-9]+", user_text.lower()))
    b = set(re.findall(r"[a-z0-9]+", tool_text.lower()))
    if not a and not b:
        return 0.0
    union = a | b
    return 1.0 - len(a & b) / len(union)


def _chat(backend: LlmBackend, prompt: str, seed: int) -> str:
    from ..gateway.base import Sampling

    return backend.chat(ChatRequest(messages=[("user", prompt)], sampling=Sampling(seed=seed)))


def _tool_step(
    turns: list[DialogTurn],
    tools: list[ApiDefinition],
    backend: LlmBackend,
    scripts: dict[str, AgentScript],
) -> list:
    prompt = scripts["tool"].render(tools=tools_block(tools), history=format_history(turns), guidance="")
    for attempt in range(2):
        suffix = f"\n(retry {attempt})" if attempt else ""
        reply = _chat(backend, prompt + suffix, seed=attempt)
        payload = extract_fenced_json(reply)
        if (
            isinstance(payload, list)
            and payload
            and all(isinstance(e, dict) and isinstance(e.get("api_name"), str) and "content" in e for e in payload)
        ):
            return payload
    raise _PlayFailure("tool agent never produced a parseable result payload")


def _play(
    dialog_type: str,
    level: int,
    attempt: int,
    steering: str,
    tools: list[ApiDefinition],
    backend: LlmBackend,
    limits: GenerationLimits,
    target_turns: int,
    scripts: dict[str, AgentScript],
) -> list[DialogTurn]:
    turns = [DialogTurn.system(SYSTEM_PROMPT)]
    opener = _OPENERS[dialog_type]
    if steering:
        opener = f"{opener} {steering}"
    guidance = f"{opener} <plan type={dialog_type} level={level} attempt={attempt}/>"
    tjson = tools_block(tools)

    def user_turn(g: str, seed: int) -> DialogTurn:
        prompt = scripts["user"].render(tools=tjson, history=format_history(turns), guidance=g)
        return DialogTurn.user(_chat(backend, prompt, seed).strip())

    turns.append(user_turn(guidance, seed=attempt))
    steps = 0
    while steps < limits.max_steps:
        steps += 1
        action = assistant_step(turns, tools, backend, votes=limits.votes, scripts=scripts)
        if action.kind == "call":
            turns.append(DialogTurn.assistant_calls(action.calls))
            turns.append(DialogTurn.tool(_tool_step(turns, tools, backend, scripts)))
            continue
        turns.append(DialogTurn.assistant_text(action.text))
        if action.kind == "ask_info" or len(turns) < target_turns:
            turns.append(user_turn(_FOLLOWUP_GUIDANCE, seed=steps))
            continue
        break
    return turns


def generate_dialog(
    tools: list[ApiDefinition],
    dialog_type: str,
    backend: LlmBackend,
    scorer: LlmBackend,
    complexity_range: ComplexityRange,
    limits: GenerationLimits,
    seed: int = 0,
    sample_id: str | None = None,
    scripts: dict[str, AgentScript] | None = None,
) -> DataSample:
    if dialog_type not in DIALOG_TYPES:
        raise ValueError(f"unknown dialog type {dialog_type!r}")
    if not tools and dialog_type != "non_tool_use":
        raise ValueError("tool-using dialog types need a nonempty tool list")
    scripts = scripts or load_scripts()
    rng = Random(seed)
    target_turns = rng.randint(limits.turns_min, limits.turns_max)
    sample_id = sample_id or f"sdg-{seed}"

    def attempt_build(level: int, steering: str) -> DataSample:
        reason = "no attempt ran"
        for attempt in range(2):
            try:
                turns = _play(
                    dialog_type, level, attempt, steering, tools, backend, limits, target_turns, scripts
                )
            except _PlayFailure as exc:
                reason = str(exc)
                continue
            draft = DataSample(
                sample_id=sample_id,
                system_prompt=SYSTEM_PROMPT,
                tool_list=list(tools),
                turns=turns,
                dialog_type=dialog_type,
            )
            if draft.turns[-1].role != "assistant":
                reason = "dialog did not end on an assistant turn"
                continue
            ok, why = dialog_type_ok(draft)
            if ok:
                return draft
            reason = why
        raise TypeUnsatisfied(f"{dialog_type}: {reason}")

    level = 0
    sample = attempt_build(level, "")
    score = evaluate_complexity(sample, scorer)
    rounds_used = 0
    while rounds_used < limits.max_rounds:
        word = guidance_for(score, complexity_range)
        if word == "keep":
            break
        level = max(0, level + (1 if word == "complicate" else -1))
        rounds_used += 1
        sample = attempt_build(level, _STEERING[word])
        score = evaluate_complexity(sample, scorer)

    sample.complexity = score.loss
    sample.provenance = {
        "dialog_type": dialog_type,
        "rounds_used": rounds_used,
        "votes": limits.votes,
        "seed": seed,
    }
    return sample
