"""Corpus statistics: counts, a complexity histogram, and rule tallies."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core.dialog import DIALOG_TYPES, DataSample
from ..tss.tree import ContextTree

HISTOGRAM_BINS = 20


@dataclass
class CorpusStats:
    total: int = 0
    per_type: dict[str, int] = field(default_factory=dict)
    histogram_lo: float = 0.0
    histogram_hi: float = 0.0
    histogram: list[int] = field(default_factory=lambda: [0] * HISTOGRAM_BINS)
    rule_counts: dict[str, int] = field(default_factory=dict)
    verdict_failures: dict[str, int] = field(default_factory=dict)
    kept: int = 0
    discarded: int = 0
    domain_coverage: int = 0


def _histogram(losses: list[float]) -> tuple[float, float, list[int]]:
    counts = [0] * HISTOGRAM_BINS
    if not losses:
        return 0.0, 0.0, counts
    lo, hi = min(losses), max(losses)
    if lo == hi:
        counts[0] = len(losses)
        return lo, hi, counts
    width = (hi - lo) / HISTOGRAM_BINS
    for loss in losses:
        index = int((loss - lo) / width)
        counts[min(index, HISTOGRAM_BINS - 1)] += 1
    return lo, hi, counts


def corpus_stats(
    samples: list[DataSample],
    reports: list[dict] | None = None,
    tree: ContextTree | None = None,
) -> CorpusStats:
    stats = CorpusStats(total=len(samples))
    stats.per_type = {typ: 0 for typ in DIALOG_TYPES}
    for sample in samples:
        if sample.dialog_type in stats.per_type:
            stats.per_type[sample.dialog_type] += 1
        else:
            stats.per_type[sample.dialog_type] = 1
    losses = [s.complexity for s in samples if s.complexity is not None]
    stats.histogram_lo, stats.histogram_hi, stats.histogram = _histogram(losses)

    domains = set()
    for sample in samples:
        for tool in sample.tool_list:
            if tool.domain_path:
                domains.add(tool.domain_path[0])
    if tree is not None:
        domains &= set(tree.domains)
    stats.domain_coverage = len(domains)

    for report in reports or []:
        if report.get("disposition") == "keep":
            stats.kept += 1
        else:
            stats.discarded += 1
        for violation in report.get("violations", []):
            rule_id = violation.get("rule_id", "unknown")
            stats.rule_counts[rule_id] = stats.rule_counts.get(rule_id, 0) + 1
        for verdict in report.get("verdicts", []):
            if not verdict.get("passed", True):
                check = verdict.get("check", "unknown")
                stats.verdict_failures[check] = stats.verdict_failures.get(check, 0) + 1
    return stats


def stats_to_record(stats: CorpusStats) -> dict:
    return {
        "total": stats.total,
        "per_type": dict(sorted(stats.per_type.items())),
        "complexity_histogram": {
            "lo": stats.histogram_lo,
            "hi": stats.histogram_hi,
            "bins": list(stats.histogram),
        },
        "rule_counts": dict(sorted(stats.rule_counts.items())),
        "verdict_failures": dict(sorted(stats.verdict_failures.items())),
        "kept": stats.kept,
        "discarded": stats.discarded,
        "domain_coverage": stats.domain_coverage,
    }
