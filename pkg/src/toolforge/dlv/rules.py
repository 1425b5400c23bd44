"""The deterministic rule layer: pure checks over tools and transcripts.

Each check returns violations, never raises, and touches neither network
nor clock, so the layer can run on anything from a single call string to a
whole corpus with reproducible results. Rule scoping is deliberately
narrow so a single seeded fault trips exactly one rule:

- tool-turn placement belongs to ``orphan_tool_response`` alone; the role
  DFA skips tool turns entirely,
- ``incomplete_response`` looks only at the final assistant text turn,
- name mismatches are judged only when a tool turn does directly follow a
  calling assistant turn.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from ..core.calls import CallSyntaxError, FunctionCall, parse_call_string
from ..core.dialog import DIALOG_TYPES, DataSample, dialog_type_ok, turn_defects
from ..core.schema import ApiDefinition, ParamSchema, definition_defects
from .catalog import RuleViolation, violation

_CLARITY_MAP = {
    "missing_name": "missing_name",
    "invalid_name": "missing_name",
    "missing_description": "missing_description",
    "dangling_required": "dangling_required",
}

_TERMINAL_CHARS = '.!?…。！？"\')]}'
_FORMAT_MANDATE_RE = re.compile(r"\[[^\[\]]*\([^()]*\)[^\[\]]*\]")


@dataclass
class DlvLimits:
    max_response_chars: int = 2000
    mixed_language_share: float = 0.2

    def __post_init__(self):
        if self.max_response_chars < 1:
            raise ValueError("max_response_chars must be positive")
        if not 0 < self.mixed_language_share <= 1:
            raise ValueError("mixed_language_share must be in (0, 1]")


def check_api_clarity(api: ApiDefinition, location: str = "tool") -> list[RuleViolation]:
    out = []
    for defect in definition_defects(api):
        rule_id = _CLARITY_MAP.get(defect.code, "invalid_schema")
        out.append(violation(rule_id, defect.message, f"{location}.{defect.path}"))
    return out


def _kind_accepts(schema: ParamSchema, value) -> bool:
    kind = schema.kind
    if kind == "string":
        return isinstance(value, str)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "float":
        # integers are acceptable where floats are declared, never the reverse
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "array":
        return isinstance(value, list)
    if kind == "dict":
        return isinstance(value, dict)
    return True


def _check_value(value, schema: ParamSchema, location: str, out: list[RuleViolation]) -> None:
    if not _kind_accepts(schema, value):
        out.append(
            violation(
                "type_mismatch",
                f"expected {schema.kind}, got {type(value).__name__}",
                location,
            )
        )
        return
    if schema.enum_values is not None and value not in schema.enum_values:
        out.append(violation("enum_violation", f"{value!r} not among the allowed values", location))
        return
    if schema.kind == "string" and schema.pattern:
        try:
            matched = re.search(schema.pattern, value) is not None
        except re.error:
            matched = True  # malformed pattern is a clarity problem, not the caller's
        if not matched:
            out.append(violation("pattern_mismatch", f"{value!r} fails pattern {schema.pattern!r}", location))
    if schema.kind == "array" and schema.items is not None:
        for i, element in enumerate(value):
            _check_value(element, schema.items, f"{location}[{i}]", out)
    if schema.kind == "dict" and schema.properties:
        for name, child in schema.properties.items():
            if name in value:
                _check_value(value[name], child, f"{location}.{name}", out)


def check_executability(
    calls: list[FunctionCall],
    tools: list[ApiDefinition],
    location: str = "call",
) -> list[RuleViolation]:
    by_name = {tool.name: tool for tool in tools}
    out: list[RuleViolation] = []
    for c, call in enumerate(calls):
        where = f"{location}[{c}]"
        tool = by_name.get(call.api_name)
        if tool is None:
            out.append(violation("unknown_api", f"{call.api_name!r} is not in the tool list", where))
            continue
        properties = tool.parameters.properties or {}
        required = tool.parameters.required or []
        for name in required:
            if name not in call.arguments:
                out.append(violation("missing_required", f"required parameter {name!r} absent", f"{where}.{name}"))
        for name, value in call.arguments.items():
            schema = properties.get(name)
            if schema is None:
                out.append(violation("unknown_param", f"{call.api_name} declares no parameter {name!r}", f"{where}.{name}"))
                continue
            _check_value(value, schema, f"{where}.{name}", out)
    return out


def _letter_scripts(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for ch in text:
        if not ch.isalpha():
            continue
        try:
            script = unicodedata.name(ch).split(" ")[0]
        except ValueError:
            script = "UNKNOWN"
        counts[script] = counts.get(script, 0) + 1
    return counts


def _text_turns(sample: DataSample) -> list[tuple[int, str, str]]:
    out = []
    for i, turn in enumerate(sample.turns):
        if turn.role in ("user", "assistant") and turn.content is not None:
            out.append((i, turn.role, turn.content))
    return out


def check_dialog_correctness(sample: DataSample, limits: DlvLimits | None = None) -> list[RuleViolation]:
    limits = limits or DlvLimits()
    out: list[RuleViolation] = []
    if not sample.sample_id:
        out.append(violation("missing_dialog_field", "sample_id is empty", "sample.sample_id"))
    if not sample.system_prompt:
        out.append(violation("missing_dialog_field", "system_prompt is empty", "sample.system_prompt"))
    if not sample.turns:
        out.append(violation("missing_dialog_field", "sample has no turns", "sample.turns"))
    if sample.dialog_type not in DIALOG_TYPES:
        out.append(violation("missing_dialog_field", f"unknown dialog_type {sample.dialog_type!r}", "sample.dialog_type"))
    for i, turn in enumerate(sample.turns):
        for problem in turn_defects(turn):
            out.append(violation("missing_dialog_field", problem, f"turns[{i}]"))

    for i, role, text in _text_turns(sample):
        where = f"turns[{i}]"
        if role == "assistant" and len(text) > limits.max_response_chars:
            out.append(
                violation(
                    "response_too_long",
                    f"{len(text)} chars exceeds the {limits.max_response_chars} limit",
                    where,
                )
            )
        bad = sorted({ch for ch in text if unicodedata.category(ch) in ("Cc", "Cf", "Co", "Cs") and ch not in "\n\t\r"})
        if bad:
            out.append(violation("invalid_characters", f"control or non-text characters {bad!r}", where))
        scripts = _letter_scripts(text)
        total = sum(scripts.values())
        if total:
            share = limits.mixed_language_share
            heavy = [s for s, n in scripts.items() if n / total >= share]
            if len(heavy) >= 2:
                out.append(
                    violation(
                        "mixed_language",
                        f"scripts {sorted(heavy)} each make up over {share:.0%} of letters",
                        where,
                    )
                )

    final_assistant = None
    for i, turn in enumerate(sample.turns):
        if turn.role == "assistant":
            final_assistant = (i, turn)
    if final_assistant is not None:
        i, turn = final_assistant
        if turn.content is not None:
            stripped = turn.content.rstrip()
            if stripped and stripped[-1] not in _TERMINAL_CHARS:
                out.append(violation("incomplete_response", "final assistant text ends without terminal punctuation", f"turns[{i}]"))
    return out


def check_sample_consistency(sample: DataSample) -> list[RuleViolation]:
    out: list[RuleViolation] = []
    turns = sample.turns

    # tool-turn placement and payload naming
    for i, turn in enumerate(turns):
        if turn.role != "tool":
            continue
        prev = turns[i - 1] if i > 0 else None
        where = f"turns[{i}]"
        if prev is None or prev.role != "assistant" or not prev.calls:
            out.append(violation("orphan_tool_response", "tool turn without an immediately preceding call turn", where))
            continue
        called = {c.api_name for c in prev.calls}
        payload = turn.tool_payload if isinstance(turn.tool_payload, list) else []
        for e, entry in enumerate(payload):
            if isinstance(entry, dict):
                name = entry.get("api_name")
                if isinstance(name, str) and name not in called:
                    out.append(
                        violation(
                            "call_response_name_mismatch",
                            f"payload names {name!r}, preceding turn called {sorted(called)}",
                            f"{where}[{e}]",
                        )
                    )

    # role order over the non-tool backbone
    backbone = [(i, t) for i, t in enumerate(turns) if t.role != "tool"]
    if turns:
        if turns[0].role != "system":
            out.append(violation("role_order_violation", "first turn must be the system prompt", "turns[0]"))
        prev_role = None
        for i, turn in backbone:
            if turn.role == "system" and i != 0:
                out.append(violation("role_order_violation", "system turn after the start", f"turns[{i}]"))
            if turn.role == "user" and prev_role == "user":
                out.append(violation("role_order_violation", "two user turns in a row", f"turns[{i}]"))
            if turn.role == "assistant" and prev_role is None:
                out.append(violation("role_order_violation", "assistant speaks before the user", f"turns[{i}]"))
            if turn.role in ("user", "assistant"):
                prev_role = turn.role
        if turns[-1].role != "assistant":
            out.append(violation("role_order_violation", "dialog must end on an assistant turn", f"turns[{len(turns) - 1}]"))

    # bracketed text that defies the mandated call format
    if _FORMAT_MANDATE_RE.search(sample.system_prompt or ""):
        for i, turn in enumerate(turns):
            if turn.role == "assistant" and turn.content and turn.content.lstrip().startswith("["):
                try:
                    parse_call_string(turn.content.strip())
                except CallSyntaxError:
                    out.append(
                        violation(
                            "format_conflict",
                            "bracket-shaped assistant text is not a valid call string",
                            f"turns[{i}]",
                        )
                    )

    ok, why = dialog_type_ok(sample)
    if not ok:
        out.append(violation("dialog_type_mismatch", why, "sample.dialog_type"))
    return out


def _order_key(v: RuleViolation) -> tuple:
    match = re.search(r"turns\[(\d+)\]", v.location)
    turn_index = int(match.group(1)) if match else -1
    return (turn_index, v.rule_id, v.location)


def run_rule_layer(
    sample: DataSample,
    tools: list[ApiDefinition] | None = None,
    limits: DlvLimits | None = None,
) -> list[RuleViolation]:
    """All four aspect checks over one sample, deterministically ordered by
    (turn index, rule id); tool-level findings sort first with index -1."""
    effective = tools if tools is not None else sample.tool_list
    out: list[RuleViolation] = []
    for t, tool in enumerate(effective):
        out.extend(check_api_clarity(tool, location=f"tools[{t}]"))
    for i, turn in enumerate(sample.turns):
        if turn.role == "assistant" and turn.calls:
            out.extend(check_executability(turn.calls, effective, location=f"turns[{i}]"))
    out.extend(check_dialog_correctness(sample, limits))
    out.extend(check_sample_consistency(sample))
    return sorted(out, key=_order_key)
