"""Context-preserving word trie: build, serialize, merge, query, select prefixes.

Each node tracks how many sentences pass through it (``pass_count``) and how
many terminate exactly there (``end_count``); the invariant
``pass_count == end_count + sum(child.pass_count)`` holds at every node and
is re-checked on deserialization and after merges. A prefix's empirical
support is simply the key set of its node's children.

The JSON wire format is a nested object per node, ``{"n": pass, "e": end,
"c": {unit: node, ...}}`` with ``"c"`` omitted when empty and children keys
emitted in sorted order, so two builds over the same corpus produce
byte-identical files.
"""

from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyCorpusError, TrieFormatError

logger = logging.getLogger(__name__)

# Parsing/serializing very deep tries trips CPython's recursion guard inside
# the json module; lift it while we hold deeply nested structures.
_JSON_RECURSION_LIMIT = 50_000


class TrieNode:
    __slots__ = ("children", "pass_count", "end_count")

    def __init__(self) -> None:
        self.children: dict[str, TrieNode] = {}
        self.pass_count = 0
        self.end_count = 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrieNode):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if (
                a.pass_count != b.pass_count
                or a.end_count != b.end_count
                or a.children.keys() != b.children.keys()
            ):
                return False
            stack.extend((a.children[k], b.children[k]) for k in a.children)
        return True

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"TrieNode(pass_count={self.pass_count}, end_count={self.end_count}, "
            f"children={len(self.children)})"
        )


def insert_sentence(root: TrieNode, words: Sequence[str]) -> TrieNode:
    """Insert one sentence path, incrementing pass counts along it."""
    units = getattr(words, "words", words)
    node = root
    node.pass_count += 1
    for unit in units:
        child = node.children.get(unit)
        if child is None:
            child = TrieNode()
            node.children[unit] = child
        child.pass_count += 1
        node = child
    node.end_count += 1
    return root


def node_at(root: TrieNode, prefix_words: Sequence[str]) -> TrieNode | None:
    """Follow the children map unit by unit; None if any step is missing."""
    node = root
    for unit in prefix_words:
        node = node.children.get(unit)
        if node is None:
            return None
    return node


def _walk(root: TrieNode) -> list[TrieNode]:
    """All nodes, parents before children."""
    order = [root]
    i = 0
    while i < len(order):
        order.extend(order[i].children.values())
        i += 1
    return order


def subtree_leaf_counts(root: TrieNode) -> dict[int, int]:
    """Map id(node) -> total leaves (sum of end_count) in its subtree."""
    order = _walk(root)
    counts: dict[int, int] = {}
    for node in reversed(order):
        counts[id(node)] = node.end_count + sum(
            counts[id(c)] for c in node.children.values()
        )
    return counts


def verify_counts(root: TrieNode) -> None:
    """Check count conservation at every node; raises TrieFormatError naming the path."""
    stack: list[tuple[TrieNode, str]] = [(root, "<root>")]
    while stack:
        node, path = stack.pop()
        child_sum = sum(c.pass_count for c in node.children.values())
        if node.pass_count != node.end_count + child_sum:
            raise TrieFormatError(
                f"count invariant violated: pass={node.pass_count} != "
                f"end={node.end_count} + children={child_sum}",
                node_path=path,
            )
        stack.extend((c, f"{path}/{k}") for k, c in node.children.items())


def _max_depth(root: TrieNode) -> int:
    depth = 0
    stack: list[tuple[TrieNode, int]] = [(root, 0)]
    while stack:
        node, d = stack.pop()
        depth = max(depth, d)
        stack.extend((c, d + 1) for c in node.children.values())
    return depth


def _to_plain(root: TrieNode) -> dict:
    """Convert to plain dicts with n/e/c key order and sorted children (iterative)."""
    out: dict = {"n": root.pass_count, "e": root.end_count}
    stack: list[tuple[TrieNode, dict]] = [(root, out)]
    while stack:
        node, obj = stack.pop()
        if node.children:
            cmap: dict = {}
            obj["c"] = cmap
            for key in sorted(node.children):
                child = node.children[key]
                cobj = {"n": child.pass_count, "e": child.end_count}
                cmap[key] = cobj
                stack.append((child, cobj))
    return out


def serialize(root: TrieNode, pretty: bool = False) -> str:
    """Serialize to the nested-dict JSON format; byte-stable for a given trie."""
    plain = _to_plain(root)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, _JSON_RECURSION_LIMIT))
    try:
        if pretty:
            return json.dumps(plain, indent=2, ensure_ascii=True)
        return json.dumps(plain, separators=(",", ":"), ensure_ascii=True)
    finally:
        sys.setrecursionlimit(old)


def deserialize(text: str) -> TrieNode:
    """Parse trie JSON, validating counts and conservation at every node."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, _JSON_RECURSION_LIMIT))
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TrieFormatError(f"malformed JSON: {exc}") from exc
    finally:
        sys.setrecursionlimit(old)

    root = TrieNode()
    stack: list[tuple[object, TrieNode, str]] = [(obj, root, "<root>")]
    while stack:
        data, node, path = stack.pop()
        if not isinstance(data, dict):
            raise TrieFormatError("node must be a JSON object", node_path=path)
        for key in ("n", "e"):
            value = data.get(key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise TrieFormatError(
                    f"field {key!r} must be a non-negative integer, got {value!r}",
                    node_path=path,
                )
        node.pass_count = data["n"]
        node.end_count = data["e"]
        children = data.get("c", {})
        if not isinstance(children, dict):
            raise TrieFormatError("field 'c' must be an object", node_path=path)
        child_sum = 0
        for key, sub in children.items():
            if not isinstance(sub, dict) or not isinstance(sub.get("n"), int):
                raise TrieFormatError(
                    "child node must be an object with integer 'n'",
                    node_path=f"{path}/{key}",
                )
            child_sum += sub["n"]
            child = TrieNode()
            node.children[key] = child
            stack.append((sub, child, f"{path}/{key}"))
        if node.pass_count != node.end_count + child_sum:
            raise TrieFormatError(
                f"count invariant violated: pass={node.pass_count} != "
                f"end={node.end_count} + children={child_sum}",
                node_path=path,
            )
    return root


def merge(trie_a: TrieNode, trie_b: TrieNode) -> TrieNode:
    """Sum counts nodewise and union children; equals a single-pass build
    over the concatenated corpora. Inputs are left untouched."""
    out = TrieNode()
    stack: list[tuple[TrieNode | None, TrieNode | None, TrieNode]] = [
        (trie_a, trie_b, out)
    ]
    while stack:
        a, b, node = stack.pop()
        node.pass_count = (a.pass_count if a else 0) + (b.pass_count if b else 0)
        node.end_count = (a.end_count if a else 0) + (b.end_count if b else 0)
        keys = set(a.children if a else ()) | set(b.children if b else ())
        for key in keys:
            child = TrieNode()
            node.children[key] = child
            stack.append(
                (
                    a.children.get(key) if a else None,
                    b.children.get(key) if b else None,
                    child,
                )
            )
    verify_counts(out)
    return out


@dataclass(frozen=True)
class TrieStats:
    articles: int
    leaves: int
    distinct_terminals: int
    max_depth: int
    root_branching: int

    def as_dict(self) -> dict:
        return {
            "articles": self.articles,
            "leaves": self.leaves,
            "distinct_terminals": self.distinct_terminals,
            "max_depth": self.max_depth,
            "root_branching": self.root_branching,
        }


def compute_stats(root: TrieNode, articles: int = 0) -> TrieStats:
    """Corpus-level trie statistics.

    ``leaves`` counts terminal events (sum of end_count, so duplicates
    weigh in) while ``distinct_terminals`` counts nodes where at least one
    sentence ends; both are reported.
    """
    nodes = _walk(root)
    leaves = sum(n.end_count for n in nodes)
    distinct = sum(1 for n in nodes if n.end_count > 0)
    return TrieStats(
        articles=articles,
        leaves=leaves,
        distinct_terminals=distinct,
        max_depth=_max_depth(root),
        root_branching=len(root.children),
    )


@dataclass(frozen=True)
class EvaluationNode:
    """A prefix together with its empirical support (children of its trie node)."""

    prefix_id: str
    prefix_words: tuple[str, ...]
    support: tuple[str, ...]
    depth: int


def select_evaluation_nodes(
    root: TrieNode,
    roots_m: int = 10,
    children_c: int = 2,
    max_depth: int = 6,
) -> list[EvaluationNode]:
    """Pick the evaluation prefix set: the ``roots_m`` heaviest sentence-starting
    subtrees, then the ``children_c`` heaviest children per node to ``max_depth``.

    Subtree weight is total leaves (sum of end_count); ties break by key
    ascending. Every visited node with non-empty support is emitted, in
    depth-first order; pure terminals (no children) are visited but never
    emitted or expanded. Fewer starting tokens than ``roots_m`` is allowed
    with a warning.
    """
    if roots_m < 1 or children_c < 1 or max_depth < 1:
        raise ValueError("roots_m, children_c and max_depth must all be >= 1")
    if not root.children:
        raise EmptyCorpusError("cannot select evaluation nodes from an empty trie")
    leaves = subtree_leaf_counts(root)
    ranked = sorted(root.children.items(), key=lambda kv: (-leaves[id(kv[1])], kv[0]))
    if len(ranked) < roots_m:
        logger.warning(
            "only %d sentence-starting tokens available (requested %d); using all",
            len(ranked),
            roots_m,
        )
    out: list[EvaluationNode] = []

    def visit(prefix: tuple[str, ...], node: TrieNode, depth: int) -> None:
        if node.children:
            out.append(
                EvaluationNode(
                    prefix_id=f"n{len(out):05d}",
                    prefix_words=prefix,
                    support=tuple(sorted(node.children)),
                    depth=depth,
                )
            )
        if depth >= max_depth or not node.children:
            return
        top = sorted(
            node.children.items(), key=lambda kv: (-leaves[id(kv[1])], kv[0])
        )[:children_c]
        for key, child in top:
            visit(prefix + (key,), child, depth + 1)

    for key, node in ranked[:roots_m]:
        visit((key,), node, 1)
    return out


def write_nodes_jsonl(nodes: Iterable[EvaluationNode], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node in nodes:
            fh.write(
                json.dumps(
                    {
                        "prefix_id": node.prefix_id,
                        "prefix_words": list(node.prefix_words),
                        "support": list(node.support),
                        "depth": node.depth,
                    },
                    ensure_ascii=True,
                )
                + "\n"
            )


def read_nodes_jsonl(path: str | Path) -> list[EvaluationNode]:
    nodes = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                nodes.append(
                    EvaluationNode(
                        prefix_id=obj["prefix_id"],
                        prefix_words=tuple(obj["prefix_words"]),
                        support=tuple(obj["support"]),
                        depth=obj["depth"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise TrieFormatError(
                    f"bad evaluation-node record on line {line_no}: {exc}"
                ) from exc
    return nodes
