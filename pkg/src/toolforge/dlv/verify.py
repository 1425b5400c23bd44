"""Combine the two verification layers into a disposition per sample."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..core.dialog import DataSample
from ..core.schema import ApiDefinition
from ..gateway.base import BackendError, LlmBackend
from .catalog import CATALOG, RuleViolation
from .model_layer import CHECKS, ModelVerdict, run_model_layer
from .rules import DlvLimits, run_rule_layer


@dataclass
class VerificationReport:
    sample_id: str
    violations: list[RuleViolation] = field(default_factory=list)
    verdicts: list[ModelVerdict] = field(default_factory=list)
    disposition: str = "discard"

    def __post_init__(self):
        if self.disposition not in ("keep", "discard"):
            raise ValueError(f"unknown disposition {self.disposition!r}")
        # A keep needs complete evidence: every model-layer check present and
        # passed. Partial verdict lists (an interrupted judgment) are discards
        # no matter how the finished checks went.
        covered = {v.check for v in self.verdicts}
        clean = (
            not self.violations
            and covered == set(CHECKS)
            and all(v.passed for v in self.verdicts)
        )
        if (self.disposition == "keep") != clean:
            raise ValueError("disposition must be keep exactly when the sample is clean")


def verify(
    sample: DataSample,
    tools: list[ApiDefinition] | None = None,
    backend: LlmBackend | None = None,
    limits: DlvLimits | None = None,
    retries: int = 2,
) -> VerificationReport:
    """Rule layer first; the model layer runs only on rule-clean samples.

    A backend failure mid-judgment re-raises with ``partial_report``
    attached so callers can persist what was learned.
    """
    violations = run_rule_layer(sample, tools, limits)
    if violations:
        return VerificationReport(sample_id=sample.sample_id, violations=violations, disposition="discard")
    if backend is None:
        raise ValueError("a judge backend is required once the rule layer passes")
    effective = tools if tools is not None else sample.tool_list
    try:
        verdicts = run_model_layer(sample, effective, backend, retries)
    except BackendError as exc:
        partial = list(getattr(exc, "partial", []) or [])
        exc.partial_report = VerificationReport(
            sample_id=sample.sample_id,
            violations=[],
            verdicts=partial,
            disposition="discard",
        )
        raise
    disposition = "keep" if all(v.passed for v in verdicts) else "discard"
    return VerificationReport(sample_id=sample.sample_id, violations=violations, verdicts=verdicts, disposition=disposition)


def report_to_record(report: VerificationReport) -> dict:
    return {
        "sample_id": report.sample_id,
        "violations": [
            {"rule_id": v.rule_id, "aspect": v.aspect, "message": v.message, "location": v.location}
            for v in report.violations
        ],
        "verdicts": [
            {"check": v.check, "passed": v.passed, "rationale": v.rationale} for v in report.verdicts
        ],
        "disposition": report.disposition,
    }


def report_from_record(record: Mapping) -> VerificationReport:
    violations = [
        RuleViolation(
            rule_id=v["rule_id"],
            aspect=v.get("aspect") or CATALOG[v["rule_id"]].aspect,
            message=v.get("message", ""),
            location=v.get("location", ""),
        )
        for v in record.get("violations", [])
    ]
    verdicts = [
        ModelVerdict(check=v["check"], passed=v["passed"], rationale=v.get("rationale", ""))
        for v in record.get("verdicts", [])
    ]
    return VerificationReport(
        sample_id=record["sample_id"],
        violations=violations,
        verdicts=verdicts,
        disposition=record["disposition"],
    )


__all__ = [
    "CHECKS",
    "VerificationReport",
    "report_from_record",
    "report_to_record",
    "verify",
]
