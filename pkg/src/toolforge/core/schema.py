"""Typed parameter schemas and API definitions, with JSON validation.

The on-disk shape mirrors the tool JSON used throughout the corpus files::

    {
      "name": "calc_absolute_pressure",
      "description": "Calculates the absolute pressure from gauge and atmospheric pressures.",
      "parameters": {
        "type": "dict",
        "properties": {
          "atm_pressure": {"type": "integer", "description": "...", "default": 1},
          "gauge_pressure": {"type": "integer", "description": "..."}
        },
        "required": ["gauge_pressure"]
      },
      "returns": {...},            # optional
      "domain_path": ["..."]       # provenance, optional
    }

``validate_api_json`` collects every defect it finds and raises a single
:class:`SchemaError` carrying all of them, rather than stopping at the first.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from random import Random
from typing import Any, Mapping

KINDS = ("string", "integer", "float", "boolean", "array", "dict")

_NAME_RE = re.compile(r"[A-Za-z0-9_. ]+")


@dataclass
class SchemaDefect:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


class SchemaError(ValueError):
    """Raised by validation with the full list of defects attached."""

    def __init__(self, defects: list[SchemaDefect]):
        self.defects = list(defects)
        super().__init__("; ".join(str(d) for d in self.defects) or "invalid definition")


@dataclass
class ParamSchema:
    """One node of a parameter (or return value) schema tree."""

    kind: str
    description: str = ""
    items: ParamSchema | None = None
    properties: dict[str, ParamSchema] | None = None
    required: list[str] | None = None
    pattern: str | None = None
    enum_values: list | None = None
    default: Any = None


@dataclass
class ApiDefinition:
    name: str
    description: str
    parameters: ParamSchema
    returns: ParamSchema | None = None
    domain_path: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# JSON <-> typed conversion
# ---------------------------------------------------------------------------


def _schema_from_json(doc: Any, path: str, defects: list[SchemaDefect]) -> ParamSchema | None:
    if not isinstance(doc, Mapping):
        defects.append(SchemaDefect("wrong_type", path, "schema node must be an object"))
        return None
    kind = doc.get("type")
    if kind is None:
        defects.append(SchemaDefect("missing_field", path, "no 'type' given"))
        return None
    if kind not in KINDS:
        defects.append(
            SchemaDefect("unknown_kind", path, f"unknown type {kind!r} (expected one of {', '.join(KINDS)})")
        )
        return None
    description = doc.get("description", "")
    if not isinstance(description, str):
        defects.append(SchemaDefect("wrong_type", path, "'description' must be a string"))
        description = ""
    node = ParamSchema(kind=kind, description=description)

    if kind == "array":
        if "items" not in doc:
            defects.append(SchemaDefect("missing_items", path, "array schema without 'items'"))
        else:
            node.items = _schema_from_json(doc["items"], f"{path}.items", defects)
    elif "items" in doc:
        defects.append(SchemaDefect("unexpected_field", path, f"'items' given for type {kind}"))

    if kind == "dict":
        props = doc.get("properties")
        if props is None:
            defects.append(SchemaDefect("missing_properties", path, "dict schema without 'properties'"))
        elif not isinstance(props, Mapping):
            defects.append(SchemaDefect("wrong_type", f"{path}.properties", "'properties' must be an object"))
        else:
            node.properties = {}
            for prop_name, prop_doc in props.items():
                child = _schema_from_json(prop_doc, f"{path}.properties.{prop_name}", defects)
                if child is not None:
                    node.properties[str(prop_name)] = child
        required = doc.get("required", [])
        if not isinstance(required, list) or not all(isinstance(r, str) for r in required):
            defects.append(SchemaDefect("wrong_type", f"{path}.required", "'required' must be a list of names"))
            required = []
        node.required = list(required)
        known = props.keys() if isinstance(props, Mapping) else ()
        for req in node.required:
            if req not in known:
                defects.append(
                    SchemaDefect("dangling_required", f"{path}.required", f"required name {req!r} not in properties")
                )
    elif "properties" in doc or "required" in doc:
        defects.append(SchemaDefect("unexpected_field", path, f"'properties'/'required' given for type {kind}"))

    if "pattern" in doc:
        pattern = doc["pattern"]
        if not isinstance(pattern, str):
            defects.append(SchemaDefect("wrong_type", f"{path}.pattern", "'pattern' must be a string"))
        else:
            try:
                re.compile(pattern)
                node.pattern = pattern
            except re.error as exc:
                defects.append(SchemaDefect("bad_pattern", f"{path}.pattern", str(exc)))
    if "enum" in doc:
        enum = doc["enum"]
        if not isinstance(enum, list) or not enum:
            defects.append(SchemaDefect("bad_enum", f"{path}.enum", "'enum' must be a nonempty list"))
        else:
            node.enum_values = list(enum)
    if "default" in doc:
        node.default = doc["default"]
    return node


def schema_to_json(schema: ParamSchema) -> dict:
    doc: dict[str, Any] = {"type": schema.kind}
    if schema.description:
        doc["description"] = schema.description
    if schema.items is not None:
        doc["items"] = schema_to_json(schema.items)
    if schema.properties is not None:
        doc["properties"] = {name: schema_to_json(child) for name, child in schema.properties.items()}
    if schema.required is not None:
        doc["required"] = list(schema.required)
    if schema.pattern is not None:
        doc["pattern"] = schema.pattern
    if schema.enum_values is not None:
        doc["enum"] = list(schema.enum_values)
    if schema.default is not None:
        doc["default"] = schema.default
    return doc


def definition_defects(api: ApiDefinition) -> list[SchemaDefect]:
    """Structural defects of an already-typed definition (used by verification)."""
    defects: list[SchemaDefect] = []
    if not api.name:
        defects.append(SchemaDefect("missing_name", "name", "empty API name"))
    elif not _NAME_RE.fullmatch(api.name):
        defects.append(
            SchemaDefect("invalid_name", "name", f"{api.name!r} contains characters outside letters/digits/_/./space")
        )
    if not api.description or not api.description.strip():
        defects.append(SchemaDefect("missing_description", "description", "empty description"))
    if api.parameters is None:
        defects.append(SchemaDefect("missing_field", "parameters", "no parameter schema"))
        return defects
    if api.parameters.kind != "dict":
        defects.append(SchemaDefect("wrong_type", "parameters", "root parameter schema must have type dict"))
    _walk_defects(api.parameters, "parameters", defects)
    if api.returns is not None:
        _walk_defects(api.returns, "returns", defects)
    return defects


def _walk_defects(schema: ParamSchema, path: str, defects: list[SchemaDefect]) -> None:
    if schema.kind not in KINDS:
        defects.append(SchemaDefect("unknown_kind", path, f"unknown type {schema.kind!r}"))
        return
    if schema.kind == "array":
        if schema.items is None:
            defects.append(SchemaDefect("missing_items", path, "array schema without 'items'"))
        else:
            _walk_defects(schema.items, f"{path}.items", defects)
    elif schema.items is not None:
        defects.append(SchemaDefect("unexpected_field", path, f"'items' given for type {schema.kind}"))
    if schema.kind == "dict":
        props = schema.properties if schema.properties is not None else {}
        if schema.properties is None:
            defects.append(SchemaDefect("missing_properties", path, "dict schema without 'properties'"))
        for name, child in props.items():
            _walk_defects(child, f"{path}.properties.{name}", defects)
        for req in schema.required or []:
            if req not in props:
                defects.append(
                    SchemaDefect("dangling_required", f"{path}.required", f"required name {req!r} not in properties")
                )
    elif schema.properties is not None or schema.required:
        defects.append(SchemaDefect("unexpected_field", path, f"'properties'/'required' given for type {schema.kind}"))
    if schema.pattern is not None:
        try:
            re.compile(schema.pattern)
        except re.error as exc:
            defects.append(SchemaDefect("bad_pattern", f"{path}.pattern", str(exc)))
    if schema.enum_values is not None and not schema.enum_values:
        defects.append(SchemaDefect("bad_enum", f"{path}.enum", "'enum' must be a nonempty list"))


def validate_api_json(doc: str | Mapping) -> ApiDefinition:
    """Parse and validate one tool definition.

    Accepts either a JSON string or an already-decoded mapping. Returns the
    typed :class:`ApiDefinition` when clean; raises :class:`SchemaError` with
    every defect found otherwise.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError([SchemaDefect("invalid_json", "$", str(exc))]) from exc
    if not isinstance(doc, Mapping):
        raise SchemaError([SchemaDefect("wrong_type", "$", "definition must be a JSON object")])

    defects: list[SchemaDefect] = []
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        defects.append(SchemaDefect("missing_field", "name", "missing or empty 'name'"))
        name = ""
    elif not _NAME_RE.fullmatch(name):
        defects.append(
            SchemaDefect("invalid_name", "name", f"{name!r} contains characters outside letters/digits/_/./space")
        )
    description = doc.get("description")
    if not isinstance(description, str) or not description.strip():
        defects.append(SchemaDefect("missing_field", "description", "missing or empty 'description'"))
        description = description if isinstance(description, str) else ""

    parameters: ParamSchema | None = None
    if "parameters" not in doc:
        defects.append(SchemaDefect("missing_field", "parameters", "missing 'parameters'"))
    else:
        parameters = _schema_from_json(doc["parameters"], "parameters", defects)
        if parameters is not None and parameters.kind != "dict":
            defects.append(SchemaDefect("wrong_type", "parameters", "root parameter schema must have type dict"))

    returns: ParamSchema | None = None
    if doc.get("returns") is not None:
        returns = _schema_from_json(doc["returns"], "returns", defects)

    domain_path = doc.get("domain_path", [])
    if not isinstance(domain_path, list) or not all(isinstance(p, str) for p in domain_path):
        defects.append(SchemaDefect("wrong_type", "domain_path", "'domain_path' must be a list of labels"))
        domain_path = []

    if defects:
        raise SchemaError(defects)
    assert parameters is not None
    return ApiDefinition(
        name=name,
        description=description,
        parameters=parameters,
        returns=returns,
        domain_path=list(domain_path),
    )


def api_to_record(api: ApiDefinition) -> dict:
    """The exact apis.jsonl record shape."""
    return {
        "name": api.name,
        "description": api.description,
        "parameters": schema_to_json(api.parameters),
        "returns": schema_to_json(api.returns) if api.returns is not None else None,
        "domain_path": list(api.domain_path),
    }


def api_from_record(record: Mapping) -> ApiDefinition:
    return validate_api_json(record)


# ---------------------------------------------------------------------------
# Deterministic example values (used by the offline backend and fixtures)
# ---------------------------------------------------------------------------

_PATTERN_CANDIDATES = (
    "42",
    "-7",
    "3.14",
    "2021-10-14 08:00:00",
    "2021-10-14",
    "08:00",
    "a@b.example",
    "AB12",
    "alpha",
)

_WORDS = (
    "amber", "basalt", "cedar", "delta", "ember", "fjord", "garnet",
    "harbor", "indigo", "juniper", "krill", "lumen", "meadow", "nectar",
)


def example_value(schema: ParamSchema | None, rng: Random) -> Any:
    """Produce a deterministic value conforming to ``schema``.

    ``None`` schemas (no declared return shape) yield a small generic map.
    Enum values win over everything else; patterns are satisfied from a fixed
    candidate list (good enough for the simple patterns the pipeline emits).
    """
    if schema is None:
        return {"result": f"ok_{rng.randrange(10_000, 99_999)}"}
    if schema.enum_values:
        return rng.choice(schema.enum_values)
    if schema.kind == "string":
        if schema.pattern:
            for candidate in _PATTERN_CANDIDATES:
                if re.search(schema.pattern, candidate):
                    return candidate
            return "42"
        return f"{rng.choice(_WORDS)}_{rng.randrange(100, 999)}"
    if schema.kind == "integer":
        return rng.randrange(2, 90)
    if schema.kind == "float":
        return round(rng.uniform(2.0, 90.0), 2)
    if schema.kind == "boolean":
        return rng.random() < 0.5
    if schema.kind == "array":
        return [example_value(schema.items, rng) for _ in range(rng.randrange(1, 3))]
    if schema.kind == "dict":
        out = {}
        for name, child in (schema.properties or {}).items():
            if name in (schema.required or []) or rng.random() < 0.5:
                out[name] = example_value(child, rng)
        if not out and schema.properties:
            first = next(iter(schema.properties))
            out[first] = example_value(schema.properties[first], rng)
        return out
    return None
