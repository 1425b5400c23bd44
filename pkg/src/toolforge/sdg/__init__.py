"""Dialog generation: role agents, complexity scoring, and steering."""

from .agents import (
    ACTION_KINDS,
    AgentScript,
    AssistantAction,
    ConsistencyFailure,
    assistant_step,
    format_history,
    load_scripts,
    parse_assistant_reply,
    tools_block,
)
from .complexity import (
    ComplexityRange,
    ComplexityScore,
    EmptyCalibrationSet,
    TokenizationEmpty,
    calibrate_range,
    evaluate_complexity,
    guidance_for,
    sample_to_prompt_target,
)
from .generate import (
    SYSTEM_PROMPT,
    GenerationLimits,
    TypeUnsatisfied,
    generate_dialog,
    query_tool_dissimilarity,
)

__all__ = [
    "ACTION_KINDS",
    "AgentScript",
    "AssistantAction",
    "ComplexityRange",
    "ComplexityScore",
    "ConsistencyFailure",
    "EmptyCalibrationSet",
    "GenerationLimits",
    "SYSTEM_PROMPT",
    "TokenizationEmpty",
    "TypeUnsatisfied",
    "assistant_step",
    "calibrate_range",
    "evaluate_complexity",
    "format_history",
    "generate_dialog",
    "guidance_for",
    "load_scripts",
    "parse_assistant_reply",
    "query_tool_dissimilarity",
    "sample_to_prompt_target",
    "tools_block",
]
