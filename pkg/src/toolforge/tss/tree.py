"""Domain/functionality tree.

Each domain is a root node whose descendants are functionality labels.
The on-disk form (``context_tree.json``) is a top-level map from domain
name to nested ``{"label": ..., "children": [...]}`` nodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from random import Random
from typing import Iterator


class EmptyTree(Exception):
    pass


@dataclass
class ContextNode:
    label: str
    children: list[ContextNode] = field(default_factory=list)

    def copy(self) -> ContextNode:
        return ContextNode(self.label, [child.copy() for child in self.children])


@dataclass
class ContextTree:
    domains: dict[str, ContextNode] = field(default_factory=dict)

    def copy(self) -> ContextTree:
        return ContextTree({name: node.copy() for name, node in self.domains.items()})


def iter_nodes(node: ContextNode) -> Iterator[ContextNode]:
    stack = [node]
    while stack:
        current = stack.pop(0)
        yield current
        stack.extend(current.children)


def node_count(tree: ContextTree) -> int:
    return sum(1 for root in tree.domains.values() for _ in iter_nodes(root))


def grow_tree(tree: ContextTree, domain: str, labels: list[str]) -> ContextTree:
    """Insert labels as children of the domain root, creating the domain if
    needed. Labels already present under the root are skipped, so repeating
    the same insertion leaves the tree unchanged."""
    out = tree.copy()
    root = out.domains.get(domain)
    if root is None:
        root = ContextNode(domain)
        out.domains[domain] = root
    present = {child.label for child in root.children}
    for label in labels:
        if label and label not in present:
            root.children.append(ContextNode(label))
            present.add(label)
    return out


def sample_domain_subtree(tree: ContextTree, breadth: int, rng: Random) -> tuple[str, list[str]]:
    """Pick a domain uniformly, then grow a connected label set from the
    root outward. Returns the domain name and 1..breadth distinct labels."""
    if breadth < 1:
        raise ValueError("breadth must be >= 1")
    if not tree.domains:
        raise EmptyTree("the context tree has no domains")
    domain = sorted(tree.domains)[rng.randrange(len(tree.domains))]
    root = tree.domains[domain]
    descendants = [node for node in iter_nodes(root)][1:]
    if not descendants:
        return domain, [root.label]
    want = rng.randint(1, min(breadth, len(descendants)))
    chosen: list[str] = []
    frontier = list(root.children)
    while frontier and len(chosen) < want:
        node = frontier.pop(rng.randrange(len(frontier)))
        if node.label not in chosen:
            chosen.append(node.label)
        frontier.extend(node.children)
    return domain, chosen


def sample_subtree(tree: ContextTree, breadth: int, rng: Random) -> list[str]:
    return sample_domain_subtree(tree, breadth, rng)[1]


def _node_to_json(node: ContextNode) -> dict:
    return {"label": node.label, "children": [_node_to_json(child) for child in node.children]}


def _node_from_json(doc: dict) -> ContextNode:
    label = doc.get("label")
    if not isinstance(label, str) or not label:
        raise ValueError("tree node needs a nonempty string label")
    children = doc.get("children") or []
    return ContextNode(label, [_node_from_json(child) for child in children])


def tree_to_json(tree: ContextTree) -> dict:
    return {name: _node_to_json(node) for name, node in sorted(tree.domains.items())}


def tree_from_json(doc: dict) -> ContextTree:
    return ContextTree({name: _node_from_json(node) for name, node in doc.items()})


def save_tree(path: str | Path, tree: ContextTree) -> None:
    Path(path).write_text(json.dumps(tree_to_json(tree), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def load_tree(path: str | Path) -> ContextTree:
    return tree_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
