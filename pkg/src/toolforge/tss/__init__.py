"""Tool synthesis: grow a domain/functionality tree from seed documents,
then evolve new API definitions from buffered examples under diversity
indicators."""

from .buffer import ExampleBuffer
from .diff import CHANGE_CLASSES, INDICATOR_CLASSES, INDICATORS, diff_definitions, missing_classes
from .evolve import (
    ExtractionError,
    PoolEmpty,
    RejectedGeneration,
    TssConfig,
    TssReport,
    default_exemplars,
    evolve_api,
    evolve_prompt,
    run_tss,
    speciate,
    speciate_prompt,
)
from .tree import (
    ContextNode,
    ContextTree,
    EmptyTree,
    grow_tree,
    iter_nodes,
    load_tree,
    node_count,
    sample_domain_subtree,
    sample_subtree,
    save_tree,
    tree_from_json,
    tree_to_json,
)

__all__ = [
    "CHANGE_CLASSES",
    "ContextNode",
    "ContextTree",
    "EmptyTree",
    "ExampleBuffer",
    "ExtractionError",
    "INDICATORS",
    "INDICATOR_CLASSES",
    "PoolEmpty",
    "RejectedGeneration",
    "TssConfig",
    "TssReport",
    "default_exemplars",
    "diff_definitions",
    "evolve_api",
    "evolve_prompt",
    "grow_tree",
    "iter_nodes",
    "load_tree",
    "missing_classes",
    "node_count",
    "run_tss",
    "sample_domain_subtree",
    "sample_subtree",
    "save_tree",
    "speciate",
    "speciate_prompt",
    "tree_from_json",
    "tree_to_json",
]
