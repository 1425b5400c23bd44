"""Command-line entry points.

Exit codes: 0 success, 2 configuration problem, 3 a stage produced zero
outputs, 4 backend failure.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .core.io import dump_record, read_samples, write_samples
from .gateway.base import BackendError
from .pipeline.config import ConfigError, PipelineConfig, load_config
from .pipeline.sampling import (
    InsufficientCorpus,
    MissingScores,
    TooFewClusters,
    UnresolvedDomainPath,
    partition_clusters,
    sample_by_complexity,
    sample_by_diversity,
)
from .pipeline.stages import StageEmpty, run as run_pipeline
from .pipeline.stats import corpus_stats, stats_to_record
from .tss.tree import load_tree

EXIT_CONFIG = 2
EXIT_EMPTY = 3
EXIT_BACKEND = 4


def _load(config_path: str, seed: int | None, out: str | None) -> PipelineConfig:
    config = load_config(config_path)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if out is not None:
        overrides["out_dir"] = out
        # path defaults derive from out_dir; recompute them unless pinned
        for name in ("apis_path", "tree_path", "samples_path", "reports_path", "corpus_path", "stats_path"):
            overrides[name] = None
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _bail(exc: Exception, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _run_stages(config_path: str, seed: int | None, out: str | None, stages: list[str] | None) -> None:
    try:
        config = _load(config_path, seed, out)
        if stages is not None:
            config = dataclasses.replace(config, stages=stages)
        stats = run_pipeline(config)
    except ConfigError as exc:
        _bail(exc, EXIT_CONFIG)
    except StageEmpty as exc:
        _bail(exc, EXIT_EMPTY)
    except BackendError as exc:
        _bail(exc, EXIT_BACKEND)
    else:
        click.echo(dump_record(stats_to_record(stats)))


_CONFIG_OPTION = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="pipeline config JSON"
)
_SEED_OPTION = click.option("--seed", type=int, default=None, help="override the config seed")
_OUT_OPTION = click.option("--out", type=click.Path(), default=None, help="override the output directory")


@click.group()
def main() -> None:
    """Synthesize, score, and verify function-calling dialogs."""


@main.command()
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
def run(config_path: str, seed: int | None, out: str | None) -> None:
    """Run every enabled stage end to end."""
    _run_stages(config_path, seed, out, None)


@main.command()
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
def tss(config_path: str, seed: int | None, out: str | None) -> None:
    """Synthesize tool definitions only."""
    _run_stages(config_path, seed, out, ["tss"])


@main.command()
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
def sdg(config_path: str, seed: int | None, out: str | None) -> None:
    """Generate dialogs from existing tool definitions."""
    _run_stages(config_path, seed, out, ["sdg"])


@main.command()
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
def dlv(config_path: str, seed: int | None, out: str | None) -> None:
    """Verify existing dialogs and write the kept corpus."""
    _run_stages(config_path, seed, out, ["dlv"])


@main.command("sample-complexity")
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
@click.option("--n", "n", required=True, type=int, help="size of each subset")
def sample_complexity(config_path: str, seed: int | None, out: str | None, n: int) -> None:
    """Slice the kept corpus into easy/medium/hard subsets of size n."""
    try:
        config = _load(config_path, seed, out)
        corpus = read_samples(config.corpus_path)
        easy, medium, hard = sample_by_complexity(corpus, n)
    except ConfigError as exc:
        _bail(exc, EXIT_CONFIG)
    except (InsufficientCorpus, MissingScores, OSError, ValueError) as exc:
        _bail(exc, EXIT_CONFIG)
    else:
        base = Path(config.out_dir)
        for name, subset in (("easy", easy), ("medium", medium), ("hard", hard)):
            path = base / f"corpus.{name}.jsonl"
            write_samples(path, subset)
            click.echo(f"{name}: {len(subset)} samples -> {path}")


@main.command("sample-diversity")
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
@click.option("--clusters-used", required=True, type=int, help="how many clusters to draw from")
@click.option("--total-clusters", default=None, type=int, help="cluster count for the partition")
@click.option("--size", default=None, type=int, help="truncate the subset to this many samples")
def sample_diversity(
    config_path: str,
    seed: int | None,
    out: str | None,
    clusters_used: int,
    total_clusters: int | None,
    size: int | None,
) -> None:
    """Restrict the kept corpus to tools from a seeded cluster choice."""
    try:
        config = _load(config_path, seed, out)
        corpus = read_samples(config.corpus_path)
        tree = load_tree(config.tree_path)
        subset = sample_by_diversity(
            corpus, tree, clusters_used, total_clusters=total_clusters, size=size, seed=config.seed
        )
        clusters = partition_clusters(tree, total_clusters if total_clusters is not None else clusters_used)
    except ConfigError as exc:
        _bail(exc, EXIT_CONFIG)
    except (TooFewClusters, UnresolvedDomainPath, OSError, ValueError) as exc:
        _bail(exc, EXIT_CONFIG)
    else:
        path = Path(config.out_dir) / f"corpus.div{clusters_used}.jsonl"
        write_samples(path, subset)
        click.echo(f"{len(subset)} samples from {clusters_used} of {len(clusters)} clusters -> {path}")


@main.command()
@_CONFIG_OPTION
@_SEED_OPTION
@_OUT_OPTION
def stats(config_path: str, seed: int | None, out: str | None) -> None:
    """Recompute statistics for the kept corpus."""
    try:
        config = _load(config_path, seed, out)
        corpus = read_samples(config.corpus_path)
        reports = []
        reports_file = Path(config.reports_path)
        if reports_file.exists():
            with reports_file.open("r", encoding="utf-8") as fh:
                reports = [json.loads(line) for line in fh if line.strip()]
        tree = load_tree(config.tree_path) if Path(config.tree_path).exists() else None
        result = corpus_stats(corpus, reports=reports, tree=tree)
    except ConfigError as exc:
        _bail(exc, EXIT_CONFIG)
    except OSError as exc:
        _bail(exc, EXIT_CONFIG)
    else:
        record = stats_to_record(result)
        Path(config.stats_path).write_text(dump_record(record) + "\n", encoding="utf-8")
        click.echo(dump_record(record))


if __name__ == "__main__":
    main()
