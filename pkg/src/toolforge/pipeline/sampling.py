"""Stratified corpus samplers: by complexity and by tree diversity."""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from ..core.dialog import DataSample
from ..tss.tree import ContextTree, iter_nodes


class InsufficientCorpus(Exception):
    pass


class MissingScores(Exception):
    pass


class UnresolvedDomainPath(Exception):
    pass


class TooFewClusters(Exception):
    pass


def sample_by_complexity(
    corpus: list[DataSample], n: int
) -> tuple[list[DataSample], list[DataSample], list[DataSample]]:
    """Sort by (loss, sample_id) and slice the bottom, centered, and top n
    samples as (easy, medium, hard). Disjoint whenever the corpus holds at
    least 3n samples."""
    if n < 1:
        raise ValueError("n must be >= 1")
    unscored = [s.sample_id for s in corpus if s.complexity is None]
    if unscored:
        raise MissingScores(f"{len(unscored)} samples carry no complexity score, e.g. {unscored[0]!r}")
    if len(corpus) < 3 * n:
        raise InsufficientCorpus(f"need at least {3 * n} samples, have {len(corpus)}")
    ordered = sorted(corpus, key=lambda s: (s.complexity, s.sample_id))
    easy = ordered[:n]
    hard = ordered[len(ordered) - n :]
    offset = (len(ordered) - n) // 2
    medium = ordered[offset : offset + n]
    return easy, medium, hard


@dataclass(frozen=True)
class Cluster:
    """A connected region of the context tree, identified by the path from
    its domain root to the region's own root node."""

    root_path: tuple[str, ...]
    size: int


def _subtree_sizes(tree: ContextTree) -> dict[tuple[str, ...], int]:
    sizes: dict[tuple[str, ...], int] = {}

    def walk(node, path: tuple[str, ...]) -> int:
        total = 1
        for child in node.children:
            total += walk(child, path + (child.label,))
        sizes[path] = total
        return total

    for domain in sorted(tree.domains):
        walk(tree.domains[domain], (domain,))
    return sizes


def _children_paths(tree: ContextTree, path: tuple[str, ...]) -> list[tuple[str, ...]]:
    node = tree.domains.get(path[0])
    if node is None:
        return []
    for label in path[1:]:
        node = next((c for c in node.children if c.label == label), None)
        if node is None:
            return []
    return [path + (child.label,) for child in node.children]


def partition_clusters(tree: ContextTree, k: int) -> list[Cluster]:
    """Split the tree into k clusters: one per domain, then repeatedly
    replace the largest splittable cluster by one cluster per child of its
    root until k regions exist. Ties break on the lexicographically
    smallest root path."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not tree.domains:
        raise TooFewClusters("the tree has no domains")
    sizes = _subtree_sizes(tree)
    clusters: list[tuple[str, ...]] = [(domain,) for domain in sorted(tree.domains)]
    if len(clusters) > k:
        raise TooFewClusters(f"{len(clusters)} domains cannot merge into {k} clusters")
    while len(clusters) < k:
        splittable = [path for path in clusters if len(_children_paths(tree, path)) >= 2]
        if not splittable:
            raise TooFewClusters(f"cannot refine past {len(clusters)} clusters, {k} requested")
        splittable.sort(key=lambda p: (-sizes[p], p))
        target = splittable[0]
        children = _children_paths(tree, target)
        if len(clusters) - 1 + len(children) > k:
            # splitting would overshoot; take the next-largest that fits, if any
            fitting = [p for p in splittable if len(clusters) - 1 + len(_children_paths(tree, p)) <= k]
            if not fitting:
                raise TooFewClusters(
                    f"no split reaches exactly {k} clusters (stuck at {len(clusters)})"
                )
            target = fitting[0]
            children = _children_paths(tree, target)
        clusters.remove(target)
        clusters.extend(children)
    clusters.sort()
    return [Cluster(root_path=path, size=sizes.get(path, 1)) for path in clusters]


def _resolve_cluster(domain_path: list[str], cluster_paths: set[tuple[str, ...]], tree: ContextTree) -> tuple[str, ...]:
    if not domain_path:
        raise UnresolvedDomainPath("empty domain_path")
    if domain_path[0] not in tree.domains:
        raise UnresolvedDomainPath(f"domain {domain_path[0]!r} is not in the tree")
    node = tree.domains[domain_path[0]]
    known = {n.label for n in iter_nodes(node)}
    for label in domain_path[1:]:
        if label not in known:
            raise UnresolvedDomainPath(f"label {label!r} is not under domain {domain_path[0]!r}")
    # longest prefix of (domain, labels...) that is a cluster root
    path = tuple(domain_path)
    for length in range(len(path), 0, -1):
        if path[:length] in cluster_paths:
            return path[:length]
    raise UnresolvedDomainPath(f"no cluster contains {domain_path!r}")


def sample_by_diversity(
    corpus: list[DataSample],
    tree: ContextTree,
    clusters_used: int,
    total_clusters: int | None = None,
    size: int | None = None,
    seed: int = 0,
) -> list[DataSample]:
    """Keep only samples whose every tool lives in a seeded choice of
    ``clusters_used`` clusters out of a ``total_clusters``-way partition,
    optionally truncated to ``size`` by a seeded uniform draw."""
    if clusters_used < 1:
        raise ValueError("clusters_used must be >= 1")
    total = total_clusters if total_clusters is not None else clusters_used
    if clusters_used > total:
        raise TooFewClusters(f"cannot use {clusters_used} of {total} clusters")
    clusters = partition_clusters(tree, total)
    cluster_paths = {c.root_path for c in clusters}
    rng = Random(seed)
    chosen = set(rng.sample(sorted(cluster_paths), clusters_used))
    subset = []
    for sample in corpus:
        homes = set()
        for tool in sample.tool_list:
            homes.add(_resolve_cluster(list(tool.domain_path), cluster_paths, tree))
        if homes <= chosen:
            subset.append(sample)
    if size is not None and len(subset) > size:
        subset = rng.sample(subset, size)
    return subset
