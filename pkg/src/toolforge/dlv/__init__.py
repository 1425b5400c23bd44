"""Two-layer sample verification: deterministic rules, then judged checks."""

from .catalog import ASPECTS, CATALOG, Rule, RuleViolation, violation
from .model_layer import (
    CHECKS,
    ModelVerdict,
    VerdictParseError,
    degenerate_text,
    judge_prompt,
    run_model_layer,
)
from .rules import (
    DlvLimits,
    check_api_clarity,
    check_dialog_correctness,
    check_executability,
    check_sample_consistency,
    run_rule_layer,
)
from .verify import VerificationReport, report_from_record, report_to_record, verify

__all__ = [
    "ASPECTS",
    "CATALOG",
    "CHECKS",
    "DlvLimits",
    "ModelVerdict",
    "Rule",
    "RuleViolation",
    "VerdictParseError",
    "VerificationReport",
    "check_api_clarity",
    "check_dialog_correctness",
    "check_executability",
    "check_sample_consistency",
    "degenerate_text",
    "judge_prompt",
    "report_from_record",
    "report_to_record",
    "run_model_layer",
    "run_rule_layer",
    "verify",
    "violation",
]
