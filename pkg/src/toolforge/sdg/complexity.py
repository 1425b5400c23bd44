"""Loss-based complexity scoring and the guidance it drives.

A sample's complexity is the mean negative log-probability (nats per
token) that a scoring backend assigns to the final assistant turn given
everything before it. Low loss means the sample is already easy for the
scored model; high loss means it is out of reach. The calibrated range
between those extremes steers dialog regeneration.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass

from ..core.calls import render_call_string
from ..core.dialog import DataSample
from ..core.schema import api_to_record
from ..gateway.base import LlmBackend, ScoreRequest
from .agents import format_history


class TokenizationEmpty(Exception):
    """The scorer tokenized the target to zero tokens."""


class EmptyCalibrationSet(Exception):
    pass


@dataclass(frozen=True)
class ComplexityScore:
    loss: float
    token_count: int

    def __post_init__(self):
        if self.loss < 0:
            raise ValueError("loss must be nonnegative")
        if self.token_count < 1:
            raise ValueError("token_count must be >= 1")


@dataclass(frozen=True)
class ComplexityRange:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower must not exceed upper")


def sample_to_prompt_target(sample: DataSample) -> tuple[str, str]:
    """Split a sample into the context x and the final assistant turn y."""
    last = None
    for i, turn in enumerate(sample.turns):
        if turn.role == "assistant":
            last = i
    if last is None:
        raise ValueError("sample has no assistant turn")
    tools_json = json.dumps([api_to_record(t) for t in sample.tool_list], ensure_ascii=False)
    prompt = (
        f"{sample.system_prompt}\n<tools>\n{tools_json}\n</tools>\n"
        f"{format_history(sample.turns[:last])}\nassistant: "
    )
    target_turn = sample.turns[last]
    if target_turn.calls:
        target = render_call_string(target_turn.calls)
    else:
        target = target_turn.content or ""
    return prompt, target


def evaluate_complexity(sample: DataSample, scorer: LlmBackend) -> ComplexityScore:
    prompt, target = sample_to_prompt_target(sample)
    response = scorer.score(ScoreRequest(prompt=prompt, target=target))
    n = len(response.token_logprobs)
    if n == 0:
        raise TokenizationEmpty("the target scored to zero tokens")
    loss = -math.fsum(response.token_logprobs) / n
    return ComplexityScore(loss=max(loss, 0.0), token_count=n)


def calibrate_range(
    mastered: list[DataSample],
    unlearned: list[DataSample],
    scorer: LlmBackend,
) -> ComplexityRange:
    """Bracket the useful loss interval between what the scored model has
    mastered (its worst mastered loss becomes the lower bound) and what it
    cannot learn (its best unlearned loss becomes the upper bound)."""
    if not mastered or not unlearned:
        raise EmptyCalibrationSet("both calibration sets must be nonempty")
    mastered_losses = [evaluate_complexity(s, scorer).loss for s in mastered]
    unlearned_losses = [evaluate_complexity(s, scorer).loss for s in unlearned]
    lower = max(mastered_losses)
    upper = min(unlearned_losses)
    if lower > upper:
        mid = (lower + upper) / 2
        half = statistics.pstdev(mastered_losses) / 2
        lower, upper = mid - half, mid + half
    return ComplexityRange(lower=lower, upper=upper)


def guidance_for(score: ComplexityScore, rng: ComplexityRange) -> str:
    """complicate below the range, simplify above it, keep inside it.

    The interval is closed: a loss sitting exactly on a bound is kept.
    """
    if score.loss < rng.lower:
        return "complicate"
    if score.loss > rng.upper:
        return "simplify"
    return "keep"
