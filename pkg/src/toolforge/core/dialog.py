"""Dialog turns, complete data samples, and the dialog-type invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .calls import FunctionCall

ROLES = ("system", "user", "assistant", "tool")
DIALOG_TYPES = ("single", "parallel", "dependent", "non_tool_use")


@dataclass
class DialogTurn:
    """One turn. Exactly one payload field is set, depending on the role:

    system/user carry ``content``; assistant carries ``content`` or ``calls``
    (never both); tool carries ``tool_payload``, a list of
    ``{"api_name": ..., "content": ...}`` objects aligned with the calls of
    the preceding assistant turn.
    """

    role: str
    content: str | None = None
    calls: list[FunctionCall] | None = None
    tool_payload: Any = None

    @classmethod
    def system(cls, text: str) -> DialogTurn:
        return cls(role="system", content=text)

    @classmethod
    def user(cls, text: str) -> DialogTurn:
        return cls(role="user", content=text)

    @classmethod
    def assistant_text(cls, text: str) -> DialogTurn:
        return cls(role="assistant", content=text)

    @classmethod
    def assistant_calls(cls, calls: list[FunctionCall]) -> DialogTurn:
        return cls(role="assistant", calls=list(calls))

    @classmethod
    def tool(cls, payload: Any) -> DialogTurn:
        return cls(role="tool", tool_payload=payload)


def turn_defects(turn: DialogTurn) -> list[str]:
    """Field-level problems with a single turn (empty list when well-formed)."""
    problems = []
    if turn.role not in ROLES:
        problems.append(f"unknown role {turn.role!r}")
        return problems
    if turn.role in ("system", "user"):
        if turn.content is None:
            problems.append(f"{turn.role} turn without content")
        if turn.calls is not None or turn.tool_payload is not None:
            problems.append(f"{turn.role} turn carrying calls or tool payload")
    elif turn.role == "assistant":
        has_content = turn.content is not None
        has_calls = bool(turn.calls)
        if has_content and has_calls:
            problems.append("assistant turn with both content and calls")
        if not has_content and not has_calls:
            problems.append("assistant turn with neither content nor calls")
        if turn.tool_payload is not None:
            problems.append("assistant turn carrying a tool payload")
    else:  # tool
        if turn.tool_payload is None:
            problems.append("tool turn without payload")
        if turn.content is not None or turn.calls is not None:
            problems.append("tool turn carrying content or calls")
    return problems


@dataclass
class DataSample:
    sample_id: str
    system_prompt: str
    tool_list: list = field(default_factory=list)
    turns: list[DialogTurn] = field(default_factory=list)
    dialog_type: str = "single"
    complexity: float | None = None
    provenance: dict = field(default_factory=dict)


def significant_leaves(value: Any) -> set:
    """Leaf values that plausibly encode information worth copying between
    turns: strings of length >= 4 and numbers other than 0, 1, and -1.

    Booleans and short or trivial literals are ignored, so an accidental
    shared ``1`` does not count as a data dependency.
    """
    found: set = set()
    stack = [value]
    while stack:
        node = stack.pop()
        if isinstance(node, bool):
            continue
        if isinstance(node, str):
            if len(node) >= 4:
                found.add(node)
        elif isinstance(node, (int, float)):
            if node not in (0, 1, -1):
                found.add(node)
        elif isinstance(node, list):
            stack.extend(node)
        elif isinstance(node, dict):
            stack.extend(node.values())
    return found


def _call_turns(sample: DataSample) -> list[tuple[int, DialogTurn]]:
    return [(i, t) for i, t in enumerate(sample.turns) if t.role == "assistant" and t.calls]


def dialog_type_ok(sample: DataSample) -> tuple[bool, str]:
    """Check the structural invariant of ``sample.dialog_type``.

    Returns ``(True, "")`` when satisfied, else ``(False, reason)``.
    """
    call_turns = _call_turns(sample)
    if sample.dialog_type == "non_tool_use":
        if call_turns:
            return False, "non_tool_use sample contains function calls"
        return True, ""
    if sample.dialog_type == "single":
        if not call_turns:
            return False, "single sample has no call turn"
        for i, turn in call_turns:
            if len(turn.calls) != 1:
                return False, f"single sample has {len(turn.calls)} calls in turn {i}"
        return True, ""
    if sample.dialog_type == "parallel":
        if any(len(turn.calls) >= 2 for _, turn in call_turns):
            return True, ""
        return False, "parallel sample has no turn with two or more calls"
    if sample.dialog_type == "dependent":
        if len(call_turns) < 2:
            return False, "dependent sample has fewer than two call turns"
        seen_payload_leaves: set = set()
        payload_cursor = 0
        for i, turn in call_turns:
            while payload_cursor < i:
                prior = sample.turns[payload_cursor]
                if prior.role == "tool":
                    seen_payload_leaves |= significant_leaves(prior.tool_payload)
                payload_cursor += 1
            if seen_payload_leaves:
                for call in turn.calls:
                    arg_leaves = significant_leaves(list(call.arguments.values()))
                    if arg_leaves & seen_payload_leaves:
                        return True, ""
        return False, "dependent sample never reuses a prior tool result"
    return False, f"unknown dialog type {sample.dialog_type!r}"
