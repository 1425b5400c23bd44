"""Stratified samplers: complexity thirds and tree-diversity subsets."""

from __future__ import annotations

from random import Random

import pytest

from toolforge.core.dialog import DataSample, DialogTurn
from toolforge.core.schema import validate_api_json
from toolforge.pipeline import (
    InsufficientCorpus,
    MissingScores,
    TooFewClusters,
    UnresolvedDomainPath,
    partition_clusters,
    sample_by_complexity,
    sample_by_diversity,
)
from toolforge.tss.tree import ContextTree, grow_tree

DOMAINS = [f"D{i}" for i in range(1, 7)]
LEAVES = {dom: [f"{dom}-leaf-{j}" for j in range(1, 6)] for dom in DOMAINS}


def _tree() -> ContextTree:
    tree = ContextTree()
    for dom in DOMAINS:
        tree = grow_tree(tree, dom, LEAVES[dom])
    return tree


def _tool(name: str, domain_path: list[str]):
    return validate_api_json(
        {
            "name": name,
            "description": f"{name} does a narrow thing.",
            "parameters": {
                "type": "dict",
                "properties": {"q": {"type": "string"}},
                "required": ["q"],
            },
            "domain_path": domain_path,
        }
    )


def _sample(sample_id: str, loss: float | None, tools=()) -> DataSample:
    return DataSample(
        sample_id=sample_id,
        system_prompt="s",
        tool_list=list(tools),
        turns=[
            DialogTurn.system("s"),
            DialogTurn.user("hello there"),
            DialogTurn.assistant_text("All set."),
        ],
        dialog_type="non_tool_use",
        complexity=loss,
    )


def test_nine_losses_split_into_exact_thirds():
    corpus = [_sample(f"s{v}", float(v)) for v in range(1, 10)]
    easy, medium, hard = sample_by_complexity(corpus, 3)
    assert [s.complexity for s in easy] == [1.0, 2.0, 3.0]
    assert [s.complexity for s in medium] == [4.0, 5.0, 6.0]
    assert [s.complexity for s in hard] == [7.0, 8.0, 9.0]


def test_large_corpus_matches_independent_sort_oracle():
    rng = Random(42)
    corpus = [_sample(f"s{i:04d}", rng.random()) for i in range(9000)]
    easy, medium, hard = sample_by_complexity(corpus, 3000)

    ordered = sorted(corpus, key=lambda s: (s.complexity, s.sample_id))
    assert [s.sample_id for s in easy] == [s.sample_id for s in ordered[:3000]]
    assert [s.sample_id for s in medium] == [s.sample_id for s in ordered[3000:6000]]
    assert [s.sample_id for s in hard] == [s.sample_id for s in ordered[6000:]]

    ids = [set(s.sample_id for s in part) for part in (easy, medium, hard)]
    assert ids[0] & ids[1] == set() and ids[1] & ids[2] == set() and ids[0] & ids[2] == set()
    assert len(ids[0] | ids[1] | ids[2]) == 9000
    assert max(s.complexity for s in easy) <= min(s.complexity for s in medium)
    assert max(s.complexity for s in medium) <= min(s.complexity for s in hard)


def test_ties_break_on_sample_id():
    corpus = [_sample(x, 1.0) for x in ("c", "a", "b")]
    easy, _, hard = sample_by_complexity(corpus, 1)
    assert easy[0].sample_id == "a"
    assert hard[0].sample_id == "c"


def test_complexity_sampler_errors():
    with pytest.raises(ValueError):
        sample_by_complexity([_sample("a", 1.0)] * 3, 0)
    with pytest.raises(MissingScores):
        sample_by_complexity([_sample("a", 1.0), _sample("b", None), _sample("c", 2.0)], 1)
    with pytest.raises(InsufficientCorpus):
        sample_by_complexity([_sample(f"s{i}", float(i)) for i in range(8)], 3)


def test_six_clusters_are_the_domains():
    clusters = partition_clusters(_tree(), 6)
    assert [c.root_path for c in clusters] == [(dom,) for dom in DOMAINS]
    assert all(c.size == 6 for c in clusters)


def test_fourteen_clusters_split_first_two_domains():
    clusters = partition_clusters(_tree(), 14)
    expected = (
        [("D1", leaf) for leaf in LEAVES["D1"]]
        + [("D2", leaf) for leaf in LEAVES["D2"]]
        + [(dom,) for dom in DOMAINS[2:]]
    )
    assert [c.root_path for c in clusters] == sorted(expected)
    sizes = {c.root_path: c.size for c in clusters}
    assert sizes[("D1", "D1-leaf-1")] == 1 and sizes[("D6",)] == 6


def test_thirty_clusters_are_all_leaves():
    clusters = partition_clusters(_tree(), 30)
    assert len(clusters) == 30
    assert all(len(c.root_path) == 2 and c.size == 1 for c in clusters)


def test_unreachable_cluster_counts():
    tree = _tree()
    with pytest.raises(TooFewClusters):
        partition_clusters(tree, 7)  # any split jumps 6 -> 10
    with pytest.raises(TooFewClusters):
        partition_clusters(tree, 3)  # fewer than the domain count
    with pytest.raises(TooFewClusters):
        partition_clusters(tree, 31)  # nothing splittable past 30
    with pytest.raises(ValueError):
        partition_clusters(tree, 0)
    with pytest.raises(TooFewClusters):
        partition_clusters(ContextTree(), 1)


def test_single_child_chain_cannot_split():
    tree = grow_tree(ContextTree(), "Solo", ["only-child"])
    assert [c.root_path for c in partition_clusters(tree, 1)] == [("Solo",)]
    with pytest.raises(TooFewClusters):
        partition_clusters(tree, 2)


def _diversity_corpus():
    t_d1 = _tool("d1_tool", ["D1", "D1-leaf-1"])
    t_d1b = _tool("d1b_tool", ["D1", "D1-leaf-2"])
    t_d2 = _tool("d2_tool", ["D2", "D2-leaf-3"])
    t_d3 = _tool("d3_tool", ["D3", "D3-leaf-5"])
    return [
        _sample("in-d1", 0.1, [t_d1]),
        _sample("in-d1-pair", 0.2, [t_d1, t_d1b]),
        _sample("spans-d1-d2", 0.3, [t_d1, t_d2]),
        _sample("in-d3", 0.4, [t_d3]),
        _sample("toolless", 0.5, []),
    ]


def test_using_every_cluster_keeps_the_whole_corpus_in_order():
    corpus = _diversity_corpus()
    subset = sample_by_diversity(corpus, _tree(), clusters_used=6, total_clusters=6, seed=9)
    assert [s.sample_id for s in subset] == [s.sample_id for s in corpus]


def test_single_cluster_subsets_are_domain_pure():
    corpus = _diversity_corpus()
    tree = _tree()
    for seed in range(6):
        subset = sample_by_diversity(corpus, tree, clusters_used=1, total_clusters=6, seed=seed)
        kept = {s.sample_id for s in subset}
        assert "toolless" in kept  # no tools, vacuously inside any choice
        assert "spans-d1-d2" not in kept  # straddles two clusters
        domains = {
            tool.domain_path[0]
            for s in subset
            for tool in s.tool_list
        }
        assert len(domains) <= 1


def test_two_clusters_can_admit_the_spanning_sample():
    corpus = _diversity_corpus()
    tree = _tree()
    admitted = [
        "spans-d1-d2"
        in {s.sample_id for s in sample_by_diversity(corpus, tree, 2, 6, seed=seed)}
        for seed in range(40)
    ]
    assert any(admitted)  # some draw picks {D1, D2}
    assert not all(admitted)


def test_domain_root_path_unresolvable_once_domain_is_split():
    rooted = _sample("rooted", 0.1, [_tool("root_tool", ["D1"])])
    tree = _tree()
    assert sample_by_diversity([rooted], tree, 6, 6, seed=0)  # (D1,) is a cluster
    with pytest.raises(UnresolvedDomainPath):
        sample_by_diversity([rooted], tree, 14, 14, seed=0)


def test_unresolvable_domain_paths():
    tree = _tree()
    for path in ([], ["Mars"], ["D1", "not-a-leaf"]):
        bad = _sample("bad", 0.1, [_tool("bad_tool", path)])
        with pytest.raises(UnresolvedDomainPath):
            sample_by_diversity([bad], tree, 6, 6, seed=0)


def test_cluster_count_validation():
    corpus = _diversity_corpus()
    tree = _tree()
    with pytest.raises(TooFewClusters):
        sample_by_diversity(corpus, tree, clusters_used=7, total_clusters=6)
    with pytest.raises(ValueError):
        sample_by_diversity(corpus, tree, clusters_used=0, total_clusters=6)


def test_size_truncation_is_deterministic():
    corpus = _diversity_corpus()
    tree = _tree()
    full = sample_by_diversity(corpus, tree, 6, 6, seed=3)
    cut_a = sample_by_diversity(corpus, tree, 6, 6, size=2, seed=3)
    cut_b = sample_by_diversity(corpus, tree, 6, 6, size=2, seed=3)
    assert len(cut_a) == 2
    assert [s.sample_id for s in cut_a] == [s.sample_id for s in cut_b]
    assert {s.sample_id for s in cut_a} <= {s.sample_id for s in full}
    roomy = sample_by_diversity(corpus, tree, 6, 6, size=99, seed=3)
    assert [s.sample_id for s in roomy] == [s.sample_id for s in full]
