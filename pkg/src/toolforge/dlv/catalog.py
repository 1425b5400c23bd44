"""Registered rule catalog for the deterministic verification layer.

Every violation the rule layer can emit is declared here, grouped into the
four checked aspects. Rule ids are stable identifiers: report files and
stats key on them.
"""

from __future__ import annotations

from dataclasses import dataclass

ASPECTS = ("api_clarity", "executability", "dialog_correctness", "consistency")


@dataclass(frozen=True)
class Rule:
    rule_id: str
    aspect: str
    summary: str


_RULES = [
    Rule("missing_name", "api_clarity", "tool definition has no usable name"),
    Rule("missing_description", "api_clarity", "tool definition has no description"),
    Rule("invalid_schema", "api_clarity", "parameter or returns schema is malformed"),
    Rule("dangling_required", "api_clarity", "required lists a parameter that does not exist"),
    Rule("unknown_api", "executability", "call names a tool absent from the tool list"),
    Rule("missing_required", "executability", "call omits a required parameter"),
    Rule("unknown_param", "executability", "call passes a parameter the tool does not declare"),
    Rule("type_mismatch", "executability", "argument value does not fit the declared kind"),
    Rule("pattern_mismatch", "executability", "string argument fails the declared pattern"),
    Rule("enum_violation", "executability", "argument value is outside the declared enum"),
    Rule("missing_dialog_field", "dialog_correctness", "sample or turn lacks a required field"),
    Rule("response_too_long", "dialog_correctness", "assistant text exceeds the length limit"),
    Rule("invalid_characters", "dialog_correctness", "text contains control or non-text characters"),
    Rule("mixed_language", "dialog_correctness", "text mixes two or more scripts heavily"),
    Rule("incomplete_response", "dialog_correctness", "final assistant text ends mid-sentence"),
    Rule("call_response_name_mismatch", "consistency", "tool payload names an API the preceding turn did not call"),
    Rule("format_conflict", "consistency", "bracketed assistant text defies the mandated call format"),
    Rule("role_order_violation", "consistency", "turn roles break the system/user/assistant order"),
    Rule("orphan_tool_response", "consistency", "tool turn without an immediately preceding call"),
    Rule("dialog_type_mismatch", "consistency", "turn structure contradicts the declared dialog type"),
]

CATALOG: dict[str, Rule] = {rule.rule_id: rule for rule in _RULES}


@dataclass(frozen=True)
class RuleViolation:
    rule_id: str
    aspect: str
    message: str
    location: str

    def __post_init__(self):
        rule = CATALOG.get(self.rule_id)
        if rule is None:
            raise ValueError(f"rule_id {self.rule_id!r} is not in the catalog")
        if rule.aspect != self.aspect:
            raise ValueError(f"rule {self.rule_id} belongs to aspect {rule.aspect}, not {self.aspect}")


def violation(rule_id: str, message: str, location: str) -> RuleViolation:
    return RuleViolation(rule_id=rule_id, aspect=CATALOG[rule_id].aspect, message=message, location=location)
