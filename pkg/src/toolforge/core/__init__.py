"""Canonical data model: call strings, API schemas, dialogs, JSONL codecs."""

from .calls import CallSyntaxError, FunctionCall, parse_call_string, render_call_string
from .schema import (
    ApiDefinition,
    ParamSchema,
    SchemaDefect,
    SchemaError,
    example_value,
    validate_api_json,
)
from .dialog import (
    DIALOG_TYPES,
    ROLES,
    DataSample,
    DialogTurn,
    dialog_type_ok,
    significant_leaves,
)

__all__ = [
    "ApiDefinition",
    "CallSyntaxError",
    "DIALOG_TYPES",
    "DataSample",
    "DialogTurn",
    "FunctionCall",
    "ParamSchema",
    "ROLES",
    "SchemaDefect",
    "SchemaError",
    "dialog_type_ok",
    "example_value",
    "parse_call_string",
    "render_call_string",
    "significant_leaves",
    "validate_api_json",
]
