"""Speciation and evolution of API definitions through a chat backend.

Prompts are plain text with a ``### task:`` marker and named blocks; any
backend that can answer them works, including the offline autopilot and
fingerprint-keyed scripted mocks. Replies must carry a fenced JSON block.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from random import Random

from ..core.schema import ApiDefinition, SchemaError, api_to_record, validate_api_json
from ..gateway.base import ChatRequest, LlmBackend, extract_fenced_json
from .buffer import ExampleBuffer
from .diff import INDICATORS, diff_definitions, missing_classes
from .tree import ContextTree, EmptyTree, grow_tree, sample_domain_subtree


class ExtractionError(Exception):
    """The backend never produced the structured block a stage requires."""


class RejectedGeneration(Exception):
    """Every generated definition failed validation or the indicator diff."""


class PoolEmpty(Exception):
    """A full synthesis run produced zero usable definitions."""


def speciate_prompt(document: str, attempt: int = 0) -> str:
    marker = f"\n(attempt {attempt})" if attempt else ""
    return (
        "You catalog software services. Read the document and name the service "
        "domain plus every distinct capability it describes.\n\n"
        "### task: speciate\n"
        f"<document>\n{document}\n</document>\n\n"
        "Reply with a fenced json block shaped like "
        '{"domain": "...", "functionalities": ["...", "..."]}.'
        f"{marker}"
    )


def evolve_prompt(subtree_labels: list[str], seed_record: dict, indicators: list[str], attempt: int = 0) -> str:
    marker = f"\n(attempt {attempt})" if attempt else ""
    return (
        "You design tool definitions. Write one new definition that covers the "
        "listed functionalities, modeled on the example but not a copy of it. "
        "Apply every requested variation.\n\n"
        "### task: evolve_api\n"
        "<subtree>\n" + "\n".join(subtree_labels) + "\n</subtree>\n"
        "<example>\n" + json.dumps(seed_record, ensure_ascii=False) + "\n</example>\n"
        "<indicators>\n" + "\n".join(indicators) + "\n</indicators>\n\n"
        "Reply with a fenced json block holding the complete definition "
        "(name, description, parameters, returns)."
        f"{marker}"
    )


def _dedupe_case_insensitive(labels: list[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for label in labels:
        key = label.strip().lower()
        if key and key not in seen:
            seen.add(key)
            out.append(label.strip())
    return out


def speciate(document: str, backend: LlmBackend, retries: int = 2) -> tuple[str, list[str]]:
    if not document or not document.strip():
        raise ValueError("document must be nonempty")
    for attempt in range(retries + 1):
        reply = backend.chat(ChatRequest(messages=[("user", speciate_prompt(document, attempt))]))
        doc = extract_fenced_json(reply)
        if not isinstance(doc, dict):
            continue
        domain = doc.get("domain")
        raw = doc.get("functionalities")
        if not isinstance(domain, str) or not domain.strip() or not isinstance(raw, list):
            continue
        labels = _dedupe_case_insensitive([x for x in raw if isinstance(x, str)])
        if labels:
            return domain.strip(), labels
    raise ExtractionError(f"no structured speciation reply after {retries + 1} attempts")


def evolve_api(
    subtree_labels: list[str],
    seed_example: ApiDefinition,
    indicators: list[str],
    backend: LlmBackend,
    retries: int = 2,
    domain: str | None = None,
) -> ApiDefinition:
    if not subtree_labels:
        raise ValueError("subtree_labels must be nonempty")
    for indicator in indicators:
        if indicator not in INDICATORS:
            raise ValueError(f"unknown diversity indicator {indicator!r}")
    seed_record = api_to_record(seed_example)
    reasons: list[str] = []
    for attempt in range(retries + 1):
        prompt = evolve_prompt(list(subtree_labels), seed_record, list(indicators), attempt)
        reply = backend.chat(ChatRequest(messages=[("user", prompt)]))
        doc = extract_fenced_json(reply)
        if doc is None:
            reasons.append("no fenced json block")
            continue
        try:
            api = validate_api_json(doc)
        except SchemaError as exc:
            reasons.append(f"schema: {exc}")
            continue
        if api.name == seed_example.name:
            reasons.append("name identical to the seed example")
            continue
        unmet = missing_classes(list(indicators), diff_definitions(seed_example, api))
        if unmet:
            reasons.append(f"indicators unmet: {', '.join(unmet)}")
            continue
        path = ([domain] if domain else []) + list(subtree_labels)
        return dataclasses.replace(api, domain_path=path)
    raise RejectedGeneration("; ".join(reasons) or "no reply")


def default_exemplars() -> list[ApiDefinition]:
    """Hand-written definitions used to prime the example buffer."""
    records = [
        {
            "name": "unit_convert",
            "description": "Converts a numeric quantity between measurement units.",
            "parameters": {
                "type": "dict",
                "properties": {
                    "value": {"type": "float", "description": "quantity to convert"},
                    "from_unit": {"type": "string", "description": "unit of the input value"},
                    "to_unit": {"type": "string", "description": "unit to convert into"},
                    "precision": {"type": "integer", "description": "decimal places in the result"},
                },
                "required": ["value", "from_unit", "to_unit"],
            },
            "returns": {
                "type": "dict",
                "description": "converted quantity",
                "properties": {
                    "converted": {"type": "float", "description": "result value"},
                    "unit": {"type": "string", "description": "unit of the result"},
                },
                "required": [],
            },
        },
        {
            "name": "catalog_search",
            "description": "Searches a catalog and returns matching item summaries.",
            "parameters": {
                "type": "dict",
                "properties": {
                    "query": {"type": "string", "description": "free-text search terms"},
                    "max_results": {"type": "integer", "description": "cap on returned items"},
                    "sort": {
                        "type": "string",
                        "description": "result ordering",
                        "enum": ["relevance", "newest", "alphabetical"],
                    },
                },
                "required": ["query"],
            },
            "returns": {
                "type": "dict",
                "description": "search outcome",
                "properties": {
                    "items": {
                        "type": "array",
                        "description": "matching item titles",
                        "items": {"type": "string", "description": "item title"},
                    },
                    "total": {"type": "integer", "description": "number of matches"},
                    "cursor": {"type": "string", "description": "token for the next page"},
                },
                "required": [],
            },
        },
    ]
    return [validate_api_json(record) for record in records]


@dataclass
class TssConfig:
    apis: int = 10
    generations: int = 1
    breadth: int = 3
    buffer_capacity: int = 64
    retries: int = 2
    max_indicators: int = 3
    exemplars: list[ApiDefinition] | None = None
    tree: ContextTree | None = None

    def __post_init__(self):
        if self.apis < 0:
            raise ValueError("apis must be >= 0")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


@dataclass
class TssReport:
    requested: int = 0
    succeeded: int = 0
    speciation_failures: list[str] = field(default_factory=list)
    evolution_failures: list[str] = field(default_factory=list)


def run_tss(
    config: TssConfig,
    seed_docs: list[str],
    backend: LlmBackend,
    rng: Random,
) -> tuple[list[ApiDefinition], ContextTree, TssReport]:
    report = TssReport(requested=config.apis)
    tree = config.tree.copy() if config.tree is not None else ContextTree({})
    for doc in seed_docs:
        try:
            domain, labels = speciate(doc, backend, config.retries)
        except ExtractionError as exc:
            report.speciation_failures.append(str(exc))
            continue
        tree = grow_tree(tree, domain, labels)
    if config.apis == 0:
        return [], tree, report
    if not tree.domains:
        raise EmptyTree("no domains: every seed document failed speciation and no tree was supplied")

    buffer = ExampleBuffer(config.buffer_capacity)
    exemplars = config.exemplars if config.exemplars is not None else default_exemplars()
    if not exemplars:
        raise ValueError("at least one exemplar is required to prime the buffer")
    taken = set()
    for exemplar in exemplars:
        buffer.add(exemplar)
        taken.add(exemplar.name)

    per_generation = _spread(config.apis, config.generations)
    pool: list[ApiDefinition] = []
    for quota in per_generation:
        for _ in range(quota):
            domain, labels = sample_domain_subtree(tree, config.breadth, rng)
            seed_example = buffer.sample(rng)
            count = rng.randint(1, min(config.max_indicators, len(INDICATORS)))
            indicators = sorted(rng.sample(INDICATORS, count))
            api = None
            for regen in range(2):
                try:
                    candidate = evolve_api(labels, seed_example, indicators, backend, config.retries, domain=domain)
                except RejectedGeneration as exc:
                    report.evolution_failures.append(str(exc))
                    break
                api = candidate
                if candidate.name not in taken:
                    break
                # name collision: regenerate once from a fresh exemplar,
                # after that fall back to a numeric suffix
                seed_example = buffer.sample(rng)
            if api is None:
                continue
            if api.name in taken:
                n = 2
                while f"{api.name}_{n}" in taken:
                    n += 1
                api = dataclasses.replace(api, name=f"{api.name}_{n}")
            taken.add(api.name)
            pool.append(api)
            buffer.add(api)
            report.succeeded += 1
    if not pool:
        raise PoolEmpty("no API definitions survived evolution")
    return pool, tree, report


def _spread(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]
