"""Judged checks and the deterministic degeneracy scan."""

from __future__ import annotations

import re

import pytest

from conftest import TOKEN_TOOL, api, clean_single
from toolforge.dlv import (
    CHECKS,
    ModelVerdict,
    VerdictParseError,
    degenerate_text,
    judge_prompt,
    run_model_layer,
)
from toolforge.gateway import AutopilotBackend, LlmBackend

PASS = '```json\n{"passed": true, "rationale": ""}\n```'
FAIL = '```json\n{"passed": false, "rationale": "the price was invented"}\n```'


class _JudgeStub(LlmBackend):
    name = "judge-stub"

    def __init__(self, replies):
        self.replies = replies
        self.prompts = []

    def chat(self, req):
        text = req.messages[-1][1]
        self.prompts.append(text)
        check = re.search(r"### task: judge_([a-z_]+)", text).group(1)
        return self.replies[check]


def test_degenerate_trigram_flagged():
    text = " ".join(["ha"] * 16)
    reason = degenerate_text(text)
    assert reason is not None and "3-gram" in reason


def test_degenerate_character_run_boundary():
    assert degenerate_text("a" * 17) is not None
    assert degenerate_text("a" * 16) is None


def test_degenerate_filler_run():
    assert degenerate_text("#$%^&*!@#$%^&*!@#") is not None  # 17 marks
    assert degenerate_text("well... okay then") is None


def test_normal_prose_is_not_degenerate():
    assert degenerate_text("The population of Ottawa is 1017449 people.") is None


def test_all_clean_yields_four_verdicts_in_order():
    sample = clean_single(1)
    verdicts = run_model_layer(sample, sample.tool_list, AutopilotBackend())
    assert [v.check for v in verdicts] == [
        "hallucination",
        "consistency",
        "tool_response",
        "degenerate_text",
    ]
    assert all(v.passed for v in verdicts)


def test_failing_judge_verdict_is_preserved():
    sample = clean_single(1)
    stub = _JudgeStub({"hallucination": PASS, "consistency": FAIL, "tool_response": PASS})
    verdicts = run_model_layer(sample, sample.tool_list, stub)
    by_check = {v.check: v for v in verdicts}
    assert by_check["consistency"].passed is False
    assert by_check["consistency"].rationale == "the price was invented"
    assert by_check["hallucination"].passed is True


def test_unparseable_judge_raises_with_partial():
    sample = clean_single(1)
    stub = _JudgeStub({"hallucination": "I refuse to answer in the agreed shape.",
                       "consistency": PASS, "tool_response": PASS})
    with pytest.raises(VerdictParseError) as info:
        run_model_layer(sample, sample.tool_list, stub, retries=2)
    partial_checks = {v.check for v in info.value.partial}
    assert partial_checks == {"consistency", "tool_response"}
    attempts = [p for p in stub.prompts if "judge_hallucination" in p]
    assert len(attempts) == 3  # retries + 1
    assert "(retry 1)" in attempts[1] and "(retry 2)" in attempts[2]


def test_failed_verdict_without_rationale_never_parses():
    sample = clean_single(1)
    silent_fail = '```json\n{"passed": false, "rationale": ""}\n```'
    stub = _JudgeStub({c: silent_fail for c in ("hallucination", "consistency", "tool_response")})
    with pytest.raises(VerdictParseError):
        run_model_layer(sample, sample.tool_list, stub, retries=0)


def test_degenerate_assistant_turn_fails_the_scan():
    sample = clean_single(2)
    sample.turns[-1].content = " ".join(["ha"] * 16)
    verdicts = run_model_layer(sample, sample.tool_list, AutopilotBackend())
    degen = verdicts[-1]
    assert degen.check == "degenerate_text"
    assert degen.passed is False
    assert "3-gram" in degen.rationale


def test_degenerate_user_turn_is_ignored():
    sample = clean_single(3)
    sample.turns[1].content = "b" * 40
    verdicts = run_model_layer(sample, sample.tool_list, AutopilotBackend())
    assert verdicts[-1].passed is True


def test_verdict_invariants():
    with pytest.raises(ValueError):
        ModelVerdict(check="vibes", passed=True, rationale="")
    with pytest.raises(ValueError):
        ModelVerdict(check="consistency", passed=False, rationale="")
    ok = ModelVerdict(check="consistency", passed=False, rationale="contradicts the user")
    assert ok.rationale


def test_judge_prompt_carries_task_marker_and_materials():
    sample = clean_single(4)
    for check in ("hallucination", "consistency", "tool_response"):
        prompt = judge_prompt(check, sample, sample.tool_list)
        assert f"### task: judge_{check}" in prompt
        assert sample.system_prompt in prompt
        assert api(TOKEN_TOOL).name not in prompt  # only this sample's tools
    assert "degenerate_text" in CHECKS
