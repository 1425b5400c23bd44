"""Structural diff between two API definitions.

Evolution is steered by named indicators; this module provides the
post-hoc check that a generated definition actually changed in the way
each indicator demands. The diff is field-wise over the schema trees and
reports coarse change classes, one or more per definition pair.
"""

from __future__ import annotations

import re

from ..core.schema import ApiDefinition, ParamSchema, schema_to_json

INDICATORS = (
    "add_functionality",
    "add_parameter",
    "add_constraint",
    "mutate_parameter_type",
    "update_returns",
)

CHANGE_CLASSES = (
    "parameter_added",
    "parameter_removed",
    "type_mutated",
    "constraint_added",
    "returns_updated",
    "functionality_extended",
)

INDICATOR_CLASSES = {
    "add_functionality": "functionality_extended",
    "add_parameter": "parameter_added",
    "add_constraint": "constraint_added",
    "mutate_parameter_type": "type_mutated",
    "update_returns": "returns_updated",
}


def _words(text: str) -> set[str]:
    return set(re.findall(r"[a-z0-9]+", text.lower()))


def _constraints(schema: ParamSchema) -> tuple:
    return (schema.pattern, tuple(schema.enum_values) if schema.enum_values else None)


def _has_constraint(schema: ParamSchema) -> bool:
    if schema.pattern or schema.enum_values:
        return True
    for child in (schema.properties or {}).values():
        if _has_constraint(child):
            return True
    return schema.items is not None and _has_constraint(schema.items)


def _walk(old: ParamSchema | None, new: ParamSchema | None, classes: set[str]) -> None:
    if old is None and new is None:
        return
    if old is None:
        classes.add("parameter_added")
        if _has_constraint(new):
            classes.add("constraint_added")
        return
    if new is None:
        classes.add("parameter_removed")
        return
    if old.kind != new.kind:
        classes.add("type_mutated")
    old_pattern, old_enum = _constraints(old)
    new_pattern, new_enum = _constraints(new)
    if (new_pattern and new_pattern != old_pattern) or (new_enum and new_enum != old_enum):
        classes.add("constraint_added")
    old_props = old.properties or {}
    new_props = new.properties or {}
    for name in sorted(set(old_props) | set(new_props)):
        _walk(old_props.get(name), new_props.get(name), classes)
    if old.items is not None and new.items is not None:
        _walk(old.items, new.items, classes)
    old_required = set(old.required or [])
    new_required = set(new.required or [])
    if new_required - old_required:
        classes.add("constraint_added")


def diff_definitions(old: ApiDefinition, new: ApiDefinition) -> set[str]:
    classes: set[str] = set()
    _walk(old.parameters, new.parameters, classes)
    # returns are compared by serialized shape so None vs schema also counts
    old_returns = schema_to_json(old.returns) if old.returns is not None else None
    new_returns = schema_to_json(new.returns) if new.returns is not None else None
    if old_returns != new_returns:
        classes.add("returns_updated")
    if _words(new.description) - _words(old.description):
        classes.add("functionality_extended")
    return classes


def missing_classes(indicators: list[str], classes: set[str]) -> list[str]:
    """Indicator names whose required change class is absent from the diff."""
    missing = []
    for indicator in indicators:
        needed = INDICATOR_CLASSES.get(indicator)
        if needed is None:
            raise ValueError(f"unknown diversity indicator {indicator!r}")
        if needed not in classes:
            missing.append(indicator)
    return missing
