"""Pipeline configuration: one JSON file drives every CLI verb."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..core.dialog import DIALOG_TYPES
from ..gateway.autopilot import AutopilotBackend
from ..gateway.base import LlmBackend
from ..gateway.http import OpenAiCompatBackend
from ..gateway.mock import ScriptedBackend, mock_from_script


class ConfigError(Exception):
    pass


STAGES = ("tss", "sdg", "dlv")
ROLES = ("agents", "scorer", "judges")

_DEFAULT_MIX = {"single": 0.4, "parallel": 0.2, "dependent": 0.2, "non_tool_use": 0.2}


@dataclass
class PipelineConfig:
    out_dir: str = "out"
    stages: list[str] = field(default_factory=lambda: list(STAGES))
    seed: int = 0

    # tss
    apis: int = 10
    generations: int = 1
    breadth: int = 3
    buffer_capacity: int = 64
    documents: list[str] = field(default_factory=list)
    seed_docs_dir: str | None = None

    # sdg
    dialogs: int = 50
    mix: dict[str, float] = field(default_factory=lambda: dict(_DEFAULT_MIX))
    votes: int = 3
    max_rounds: int = 2
    turns_min: int = 3
    turns_max: int = 9
    turn_bounds: dict[str, list[int]] = field(default_factory=dict)
    tools_per_dialog: int = 3
    complexity_range: list[float] = field(default_factory=lambda: [0.2, 2.8])
    refill: bool = False
    refill_budget: int = 0

    # dlv
    max_response_chars: int = 2000
    judge_retries: int = 2

    # backends, per role, each {"kind": ..., ...}
    backends: dict[str, dict] = field(default_factory=lambda: {"default": {"kind": "autopilot"}})

    # io paths (default under out_dir)
    apis_path: str | None = None
    tree_path: str | None = None
    samples_path: str | None = None
    reports_path: str | None = None
    corpus_path: str | None = None
    stats_path: str | None = None

    def __post_init__(self):
        if self.apis < 0 or self.dialogs < 0:
            raise ConfigError("counts must be >= 0")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        unknown_stages = set(self.stages) - set(STAGES)
        if unknown_stages:
            raise ConfigError(f"unknown stages: {sorted(unknown_stages)}")
        unknown_types = set(self.mix) - set(DIALOG_TYPES)
        if unknown_types:
            raise ConfigError(f"unknown dialog types in mix: {sorted(unknown_types)}")
        if any(v < 0 for v in self.mix.values()):
            raise ConfigError("mix shares must be nonnegative")
        if abs(sum(self.mix.values()) - 1.0) > 1e-9:
            raise ConfigError("dialog-type mix must sum to 1")
        if self.votes < 1 or self.votes % 2 == 0:
            raise ConfigError("votes must be a positive odd count")
        if not 1 <= self.turns_min <= self.turns_max:
            raise ConfigError("need 1 <= turns_min <= turns_max")
        for typ, bounds in self.turn_bounds.items():
            if typ not in DIALOG_TYPES:
                raise ConfigError(f"turn_bounds for unknown dialog type {typ!r}")
            if len(bounds) != 2 or not 1 <= bounds[0] <= bounds[1]:
                raise ConfigError(f"turn_bounds[{typ}] must be [min, max] with 1 <= min <= max")
        if len(self.complexity_range) != 2 or self.complexity_range[0] > self.complexity_range[1]:
            raise ConfigError("complexity_range must be [lower, upper] with lower <= upper")
        if self.tools_per_dialog < 1:
            raise ConfigError("tools_per_dialog must be >= 1")
        base = Path(self.out_dir)
        self.apis_path = self.apis_path or str(base / "apis.jsonl")
        self.tree_path = self.tree_path or str(base / "context_tree.json")
        self.samples_path = self.samples_path or str(base / "samples.jsonl")
        self.reports_path = self.reports_path or str(base / "reports.jsonl")
        self.corpus_path = self.corpus_path or str(base / "corpus.jsonl")
        self.stats_path = self.stats_path or str(base / "stats.json")
        paths = [self.apis_path, self.tree_path, self.samples_path, self.reports_path, self.corpus_path, self.stats_path]
        if len(set(paths)) != len(paths):
            raise ConfigError("io paths must be distinct")

    def bounds_for(self, dialog_type: str) -> tuple[int, int]:
        if dialog_type in self.turn_bounds:
            lo, hi = self.turn_bounds[dialog_type]
            return lo, hi
        return self.turns_min, self.turns_max


def config_from_dict(doc: dict) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return PipelineConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc))


def load_config(path: str | Path) -> PipelineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return config_from_dict(doc)


def config_hash(config: PipelineConfig) -> str:
    doc = {f.name: getattr(config, f.name) for f in fields(PipelineConfig)}
    canonical = json.dumps(doc, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _build_backend(binding: dict, seed: int) -> LlmBackend:
    kind = binding.get("kind", "autopilot")
    if kind == "autopilot":
        return AutopilotBackend(seed=binding.get("seed", seed))
    if kind == "mock":
        path = binding.get("script")
        chat_mode = binding.get("chat_mode", "echo")
        score_mode = binding.get("score_mode", "uniform")
        uniform_p = binding.get("uniform_p", 0.5)
        if path:
            return mock_from_script(path, chat_mode=chat_mode, score_mode=score_mode, uniform_p=uniform_p)
        return ScriptedBackend(chat_mode=chat_mode, score_mode=score_mode, uniform_p=uniform_p, seed=binding.get("seed", seed))
    if kind == "openai":
        try:
            return OpenAiCompatBackend(
                base_url=binding["base_url"],
                model=binding["model"],
                score_model=binding.get("score_model"),
                scoring=binding.get("scoring", False),
                timeout=binding.get("timeout", 60.0),
                max_attempts=binding.get("max_attempts", 3),
            )
        except KeyError as exc:
            raise ConfigError(f"openai backend binding misses {exc}")
    raise ConfigError(f"unknown backend kind {kind!r}")


def resolve_backends(config: PipelineConfig) -> dict[str, LlmBackend]:
    """One backend per role (agents, scorer, judges), with ``default``
    filling any role not bound explicitly. Identical bindings share one
    instance so recording wrappers see all traffic."""
    default_binding = config.backends.get("default", {"kind": "autopilot"})
    cache: dict[str, LlmBackend] = {}
    out: dict[str, LlmBackend] = {}
    for role in ROLES:
        binding = config.backends.get(role, default_binding)
        key = json.dumps(binding, sort_keys=True)
        if key not in cache:
            cache[key] = _build_backend(binding, config.seed)
        out[role] = cache[key]
    return out
