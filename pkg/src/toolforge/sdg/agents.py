"""Role agents: prompt scripts, the assistant reply protocol, and voting.

Each of the three roles (user, assistant, tool) is driven by a prompt
template with exactly three slots: ``${tools}``, ``${history}``, and
``${guidance}``. The assistant replies in a line-tagged form::

    THOUGHT: optional free text
    ACTION: call | ask_info | summarize | answer
    CALLS: [name(arg=value, ...)]      (only when ACTION is call)
    TEXT: the message to the user      (all other actions)

Assistant actions are sampled several times and only the majority
decision class, keyed by (action kind, set of called API names), is
adopted.
"""

from __future__ import annotations

import json
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

from ..core.calls import CallSyntaxError, FunctionCall, parse_call_string, render_call_string
from ..core.dialog import DialogTurn
from ..core.schema import ApiDefinition, api_to_record
from ..gateway.base import ChatRequest, LlmBackend, Sampling

ACTION_KINDS = ("call", "ask_info", "summarize", "answer")
_ALLOWED_SLOTS = {"tools", "history", "guidance"}


class ConsistencyFailure(Exception):
    """No majority decision emerged from voting, even after a re-vote."""


def _template_identifiers(text: str) -> set[str]:
    names = set()
    for match in string.Template.pattern.finditer(text):
        if match.group("invalid") is not None:
            raise ValueError("template contains a stray $")
        name = match.group("named") or match.group("braced")
        if name:
            names.add(name)
    return names


@dataclass
class AgentScript:
    role: str
    prompt_template: str

    def __post_init__(self):
        if self.role not in ("user", "assistant", "tool"):
            raise ValueError(f"unknown agent role {self.role!r}")
        unknown = _template_identifiers(self.prompt_template) - _ALLOWED_SLOTS
        if unknown:
            raise ValueError(f"template references unknown slots: {sorted(unknown)}")

    def render(self, tools: str, history: str, guidance: str) -> str:
        return string.Template(self.prompt_template).safe_substitute(
            tools=tools, history=history, guidance=guidance
        )


def load_scripts() -> dict[str, AgentScript]:
    scripts = {}
    base = resources.files("toolforge.sdg").joinpath("prompts")
    for role in ("user", "assistant", "tool"):
        text = base.joinpath(f"{role}.tmpl").read_text(encoding="utf-8")
        scripts[role] = AgentScript(role=role, prompt_template=text)
    return scripts


@dataclass
class AssistantAction:
    kind: str
    calls: list[FunctionCall] = field(default_factory=list)
    text: str = ""
    thought: str | None = None

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "call" and not self.calls:
            raise ValueError("call actions need at least one call")
        if self.kind != "call" and self.calls:
            raise ValueError("only call actions may carry calls")


def parse_assistant_reply(text: str) -> AssistantAction:
    thought = None
    action = None
    calls_line = None
    text_line = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("THOUGHT:"):
            thought = stripped[len("THOUGHT:") :].strip()
        elif stripped.startswith("ACTION:"):
            action = stripped[len("ACTION:") :].strip()
        elif stripped.startswith("CALLS:"):
            calls_line = stripped[len("CALLS:") :].strip()
        elif stripped.startswith("TEXT:"):
            text_line = stripped[len("TEXT:") :].strip()
    if action not in ACTION_KINDS:
        raise ValueError(f"reply carries no recognizable ACTION line: {text[:80]!r}")
    if action == "call":
        if not calls_line:
            raise ValueError("call action without a CALLS line")
        calls = parse_call_string(calls_line)
        return AssistantAction(kind="call", calls=calls, thought=thought)
    if not text_line:
        raise ValueError(f"{action} action without a TEXT line")
    return AssistantAction(kind=action, text=text_line, thought=thought)


def format_history(turns: list[DialogTurn]) -> str:
    lines = []
    for turn in turns:
        if turn.role == "assistant" and turn.calls:
            lines.append(f"assistant: {render_call_string(turn.calls)}")
        elif turn.role == "tool":
            lines.append(f"tool: {json.dumps(turn.tool_payload, ensure_ascii=False)}")
        else:
            lines.append(f"{turn.role}: {turn.content or ''}")
    return "\n".join(lines)


def tools_block(tools: list[ApiDefinition]) -> str:
    return json.dumps([api_to_record(t) for t in tools], ensure_ascii=False)


def _vote_key(reply: str) -> tuple:
    try:
        action = parse_assistant_reply(reply)
    except (ValueError, CallSyntaxError):
        return ("invalid",)
    if action.kind == "call":
        return ("call", frozenset(c.api_name for c in action.calls))
    return (action.kind, frozenset())


def assistant_step(
    history: list[DialogTurn],
    tools: list[ApiDefinition],
    backend: LlmBackend,
    votes: int = 3,
    scripts: dict[str, AgentScript] | None = None,
    guidance: str = "",
) -> AssistantAction:
    if votes < 1 or votes % 2 == 0:
        raise ValueError("votes must be a positive odd count")
    scripts = scripts or load_scripts()
    prompt = scripts["assistant"].render(
        tools=tools_block(tools), history=format_history(history), guidance=guidance
    )

    def round_of(seed_base: int) -> AssistantAction | None:
        replies = []
        for v in range(votes):
            req = ChatRequest(
                messages=[("user", prompt)],
                sampling=Sampling(temperature=0.7 if votes > 1 else 0.0, seed=seed_base + v),
            )
            replies.append(backend.chat(req))
        keys = [_vote_key(r) for r in replies]
        winner, count = Counter(keys).most_common(1)[0]
        if winner == ("invalid",) or count * 2 <= votes:
            return None
        chosen = replies[keys.index(winner)]
        return parse_assistant_reply(chosen)

    action = round_of(0)
    if action is None:
        action = round_of(votes)
    if action is None:
        raise ConsistencyFailure(f"no majority decision across {votes} votes, twice")
    return action
