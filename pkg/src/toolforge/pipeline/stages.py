"""Stage orchestration with append-only artifacts and resume.

Every stage writes one JSONL artifact plus a sidecar manifest
(``<artifact>.manifest.json``) holding the stage name, config hash, emitted
count, next input index, and a completion flag. A rerun with the same
config resumes an incomplete stage from ``next_index`` and skips a complete
one; a config change restarts the stage from scratch. Per-item work is
seeded by hashing (master seed, stage, index), so a resumed run emits the
same bytes an uninterrupted run would have.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from random import Random

from ..core.dialog import DataSample
from ..core.io import append_jsonl, dump_record, read_apis, read_samples, sample_to_record, write_apis
from ..core.schema import ApiDefinition
from ..dlv.rules import DlvLimits
from ..dlv.verify import report_to_record, verify
from ..gateway.base import BackendError
from ..sdg.agents import ConsistencyFailure, load_scripts
from ..sdg.complexity import ComplexityRange, TokenizationEmpty
from ..sdg.generate import GenerationLimits, TypeUnsatisfied, generate_dialog
from ..tss.evolve import PoolEmpty, TssConfig, run_tss
from ..tss.tree import ContextTree, load_tree, save_tree
from .config import ConfigError, PipelineConfig, config_hash, resolve_backends
from .stats import CorpusStats, corpus_stats, stats_to_record


class StageEmpty(Exception):
    """A stage finished with zero outputs."""

    def __init__(self, stage: str, message: str = ""):
        super().__init__(message or f"stage {stage} produced zero outputs")
        self.stage = stage


def derived_seed(master: int, stage: str, index: int) -> int:
    digest = hashlib.sha256(f"{master}:{stage}:{index}".encode("utf-8")).hexdigest()
    return int(digest[:12], 16)


def _manifest_path(artifact: str) -> Path:
    return Path(str(artifact) + ".manifest.json")


def _read_manifest(artifact: str) -> dict | None:
    path = _manifest_path(artifact)
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None


def _write_manifest(artifact: str, stage: str, chash: str, count: int, next_index: int, complete: bool) -> None:
    doc = {"stage": stage, "config_hash": chash, "count": count, "next_index": next_index, "complete": complete}
    _manifest_path(artifact).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def _count_lines(path: str) -> int:
    p = Path(path)
    if not p.exists():
        return 0
    with p.open("r", encoding="utf-8") as fh:
        return sum(1 for line in fh if line.strip())


def _resume_point(artifact: str, stage: str, chash: str) -> tuple[int, int, bool]:
    """(emitted_count, next_index, already_complete), restarting on any
    mismatch between manifest and artifact."""
    manifest = _read_manifest(artifact)
    if manifest is None or manifest.get("config_hash") != chash or manifest.get("stage") != stage:
        Path(artifact).unlink(missing_ok=True)
        return 0, 0, False
    count = _count_lines(artifact)
    if count != manifest.get("count"):
        Path(artifact).unlink(missing_ok=True)
        return 0, 0, False
    if manifest.get("complete"):
        return count, manifest.get("next_index", count), True
    return count, manifest.get("next_index", count), False


def _seed_documents(config: PipelineConfig) -> list[str]:
    docs = list(config.documents)
    if config.seed_docs_dir:
        directory = Path(config.seed_docs_dir)
        if not directory.is_dir():
            raise ConfigError(f"seed_docs_dir {config.seed_docs_dir!r} is not a directory")
        for path in sorted(directory.glob("*.txt")):
            docs.append(path.read_text(encoding="utf-8"))
    return docs


def stage_tss(config: PipelineConfig, backends) -> tuple[list[ApiDefinition], ContextTree]:
    chash = config_hash(config)
    _, _, complete = _resume_point(config.apis_path, "tss", chash)
    if complete and Path(config.tree_path).exists():
        return read_apis(config.apis_path), load_tree(config.tree_path)
    docs = _seed_documents(config)
    if not docs:
        raise ConfigError("tss needs seed documents (config keys: documents, seed_docs_dir)")
    rng = Random(derived_seed(config.seed, "tss", 0))
    tss_config = TssConfig(
        apis=config.apis,
        generations=config.generations,
        breadth=config.breadth,
        buffer_capacity=config.buffer_capacity,
    )
    try:
        pool, tree, _report = run_tss(tss_config, docs, backends["agents"], rng)
    except PoolEmpty as exc:
        raise StageEmpty("tss", str(exc))
    write_apis(config.apis_path, pool)
    save_tree(config.tree_path, tree)
    _write_manifest(config.apis_path, "tss", chash, len(pool), len(pool), True)
    return pool, tree


def _type_schedule(config: PipelineConfig) -> list[str]:
    """Dialog type per index: largest-remainder allocation of the mix over
    the requested count, shuffled by a stage-level seed."""
    total = config.dialogs
    quotas = {typ: config.mix.get(typ, 0.0) * total for typ in sorted(config.mix)}
    counts = {typ: int(q) for typ, q in quotas.items()}
    leftover = total - sum(counts.values())
    by_remainder = sorted(quotas, key=lambda t: (-(quotas[t] - counts[t]), t))
    for typ in by_remainder[:leftover]:
        counts[typ] += 1
    schedule = [typ for typ in sorted(counts) for _ in range(counts[typ])]
    Random(derived_seed(config.seed, "sdg-order", 0)).shuffle(schedule)
    return schedule


def _generate_one(
    config: PipelineConfig,
    pool: list[ApiDefinition],
    backends,
    scripts,
    index: int,
    dialog_type: str,
) -> DataSample:
    seed = derived_seed(config.seed, "sdg", index)
    rng = Random(seed)
    tools = rng.sample(pool, min(config.tools_per_dialog, len(pool)))
    lo, hi = config.bounds_for(dialog_type)
    limits = GenerationLimits(
        turns_min=lo, turns_max=hi, max_rounds=config.max_rounds, votes=config.votes
    )
    return generate_dialog(
        tools,
        dialog_type,
        backends["agents"],
        backends["scorer"],
        ComplexityRange(*config.complexity_range),
        limits,
        seed=seed,
        sample_id=f"s{index:05d}",
        scripts=scripts,
    )


def stage_sdg(config: PipelineConfig, pool: list[ApiDefinition], backends) -> list[DataSample]:
    chash = config_hash(config)
    count, next_index, complete = _resume_point(config.samples_path, "sdg", chash)
    if complete:
        return read_samples(config.samples_path)
    if not pool:
        raise StageEmpty("sdg", "no tool definitions to build dialogs from")
    schedule = _type_schedule(config)
    scripts = load_scripts()
    for index in range(next_index, len(schedule)):
        try:
            sample = _generate_one(config, pool, backends, scripts, index, schedule[index])
        except (TypeUnsatisfied, ConsistencyFailure, TokenizationEmpty):
            _write_manifest(config.samples_path, "sdg", chash, count, index + 1, False)
            continue
        append_jsonl(config.samples_path, sample_to_record(sample))
        count += 1
        _write_manifest(config.samples_path, "sdg", chash, count, index + 1, False)
    _write_manifest(config.samples_path, "sdg", chash, count, len(schedule), True)
    if count == 0:
        raise StageEmpty("sdg")
    return read_samples(config.samples_path)


def stage_dlv(
    config: PipelineConfig,
    samples: list[DataSample],
    pool: list[ApiDefinition],
    backends,
) -> list[DataSample]:
    chash = config_hash(config)
    count, next_index, complete = _resume_point(config.reports_path, "dlv", chash)
    if complete:
        return read_samples(config.corpus_path)
    if next_index == 0:
        Path(config.corpus_path).unlink(missing_ok=True)
    limits = DlvLimits(max_response_chars=config.max_response_chars)
    for index in range(next_index, len(samples)):
        sample = samples[index]
        try:
            report = verify(sample, pool, backends["judges"], limits, retries=config.judge_retries)
        except BackendError as exc:
            partial = getattr(exc, "partial_report", None)
            if partial is not None:
                append_jsonl(config.reports_path, report_to_record(partial))
                _write_manifest(config.reports_path, "dlv", chash, count + 1, index + 1, False)
            raise
        append_jsonl(config.reports_path, report_to_record(report))
        count += 1
        if report.disposition == "keep":
            append_jsonl(config.corpus_path, sample_to_record(sample))
        _write_manifest(config.reports_path, "dlv", chash, count, index + 1, False)
    _write_manifest(config.reports_path, "dlv", chash, count, len(samples), True)
    kept = read_samples(config.corpus_path) if Path(config.corpus_path).exists() else []
    if not kept:
        raise StageEmpty("dlv")
    return kept


def run(config: PipelineConfig) -> CorpusStats:
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    backends = resolve_backends(config)

    pool: list[ApiDefinition] = []
    tree = None
    if "tss" in config.stages:
        pool, tree = stage_tss(config, backends)
    elif Path(config.apis_path).exists():
        pool = read_apis(config.apis_path)
        if Path(config.tree_path).exists():
            tree = load_tree(config.tree_path)

    samples: list[DataSample] = []
    if "sdg" in config.stages:
        if not pool:
            raise ConfigError("sdg stage needs tool definitions; run tss first or provide apis.jsonl")
        samples = stage_sdg(config, pool, backends)
    elif Path(config.samples_path).exists():
        samples = read_samples(config.samples_path)

    kept: list[DataSample] = []
    if "dlv" in config.stages:
        if not samples:
            raise ConfigError("dlv stage needs samples; run sdg first or provide samples.jsonl")
        kept = stage_dlv(config, samples, pool, backends)
        if config.refill and len(kept) < config.dialogs and config.refill_budget > 0:
            kept = _refill(config, pool, backends, kept)
    elif Path(config.corpus_path).exists():
        kept = read_samples(config.corpus_path)

    reports = _read_reports(config.reports_path)
    stats = corpus_stats(kept, reports=reports, tree=tree)
    Path(config.stats_path).write_text(
        dump_record(stats_to_record(stats)) + "\n", encoding="utf-8"
    )
    return stats


def _read_reports(path: str) -> list[dict]:
    p = Path(path)
    if not p.exists():
        return []
    out = []
    with p.open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


def _refill(config: PipelineConfig, pool, backends, kept: list[DataSample]) -> list[DataSample]:
    """Regenerate and verify replacements for discarded samples, bounded by
    the refill budget. Default configuration leaves this off."""
    chash = config_hash(config)
    limits = DlvLimits(max_response_chars=config.max_response_chars)
    scripts = load_scripts()
    schedule = _type_schedule(config)
    have = {s.sample_id for s in kept}
    missing_types = [schedule[i] for i in range(len(schedule)) if f"s{i:05d}" not in have]
    index = len(schedule)
    for budget_used in range(config.refill_budget):
        if len(kept) >= config.dialogs or not missing_types:
            break
        dialog_type = missing_types[budget_used % len(missing_types)]
        try:
            sample = _generate_one(config, pool, backends, scripts, index, dialog_type)
        except (TypeUnsatisfied, ConsistencyFailure, TokenizationEmpty):
            index += 1
            continue
        append_jsonl(config.samples_path, sample_to_record(sample))
        report = verify(sample, pool, backends["judges"], limits, retries=config.judge_retries)
        append_jsonl(config.reports_path, report_to_record(report))
        if report.disposition == "keep":
            append_jsonl(config.corpus_path, sample_to_record(sample))
            kept.append(sample)
        index += 1
    _write_manifest(config.samples_path, "sdg", chash, _count_lines(config.samples_path), index, True)
    _write_manifest(config.reports_path, "dlv", chash, _count_lines(config.reports_path), index, True)
    return kept
