"""Orchestration: config, staged execution, samplers, and stats."""

from .config import ConfigError, PipelineConfig, config_from_dict, config_hash, load_config, resolve_backends
from .sampling import (
    Cluster,
    InsufficientCorpus,
    MissingScores,
    TooFewClusters,
    UnresolvedDomainPath,
    partition_clusters,
    sample_by_complexity,
    sample_by_diversity,
)
from .stages import StageEmpty, derived_seed, run, stage_dlv, stage_sdg, stage_tss
from .stats import HISTOGRAM_BINS, CorpusStats, corpus_stats, stats_to_record

__all__ = [
    "Cluster",
    "ConfigError",
    "CorpusStats",
    "HISTOGRAM_BINS",
    "InsufficientCorpus",
    "MissingScores",
    "PipelineConfig",
    "StageEmpty",
    "TooFewClusters",
    "UnresolvedDomainPath",
    "config_from_dict",
    "config_hash",
    "corpus_stats",
    "derived_seed",
    "load_config",
    "partition_clusters",
    "resolve_backends",
    "run",
    "sample_by_complexity",
    "sample_by_diversity",
    "stage_dlv",
    "stage_sdg",
    "stage_tss",
    "stats_to_record",
]
