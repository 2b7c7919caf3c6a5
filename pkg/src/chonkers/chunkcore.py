"""Chunk nodes, weight classes and the deduplicating node store.

Structure nodes (``Leaf``, ``Merge``, ``Caterpillar``) are hash-consed by
kind, child identity and provenance.  Every structure node points at a
``Content`` record which is shared by all structure nodes with bit-identical
raw content, regardless of how they were merged.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .bitcontent import DEFAULT_RING, BitContent, PolyRing, encode_number
from .errors import UnsupportedSizeError

WEIGHT_FIELD_BITS = 64
HASH_FIELD_BITS = 32

# phase tags; a node's level orders (layer, phase) pairs, leaves are level 0
BALANCING = 0
CATERPILLAR = 1
DIFFBIT = 2
PHASE_NAMES = ("balancing", "caterpillar", "diffbit")


def level_of(layer: int, phase: int) -> int:
    return 3 * layer + phase - 2


def layer_phase(level: int) -> tuple[int, int]:
    """Inverse of ``level_of``; level 0 maps to ``(0, -1)`` (proto-chunks)."""
    if level == 0:
        return 0, -1
    return (level + 2) // 3, (level + 2) % 3


class WeightClass(enum.Enum):
    MEGACHONKER = "megachonker"
    HEFTYCHONK = "heftychonk"
    FINE_BOI = "fine boi"
    KITTEN = "kitten"


def classify(weight: int, unit: int) -> WeightClass:
    if weight >= unit:
        return WeightClass.MEGACHONKER
    if 2 * weight >= unit:
        return WeightClass.HEFTYCHONK
    if 4 * weight >= unit:
        return WeightClass.FINE_BOI
    return WeightClass.KITTEN


def is_heckin(left_weight: int, right_weight: int, unit: int) -> bool:
    return left_weight + right_weight < unit


class Content:
    """Content-only view of a chunk, shared by structurally different nodes."""

    __slots__ = ("weight", "hash", "prototype", "_cache")

    def __init__(self, weight: int, hash: int, prototype: "Node"):
        self.weight = weight
        self.hash = hash
        self.prototype = prototype
        self._cache: Optional[dict] = None

    @property
    def cache(self) -> dict:
        """Per-content memo table (reversals and the like), created on first use."""
        if self._cache is None:
            self._cache = {}
        return self._cache

    def __repr__(self):
        return f"<Content w={self.weight} h={self.hash:#010x}>"


class Node:
    __slots__ = ("weight", "level", "content", "__weakref__")

    is_leaf = False
    is_caterpillar = False

    weight: int
    level: int
    content: Content

    @property
    def layer(self) -> int:
        return layer_phase(self.level)[0]

    @property
    def phase(self) -> int:
        return layer_phase(self.level)[1]

    @property
    def segment_weight(self) -> int:
        return self.weight

    def children(self) -> list[tuple["Node", int]]:
        """Constituents as ``(node, repeat)`` pairs, left to right."""
        return []


class Leaf(Node):
    __slots__ = ("bits",)
    is_leaf = True
    prio = None

    def __init__(self, bits: int, width: int):
        self.bits = bits
        self.weight = width
        self.level = 0

    def __repr__(self):
        return f"Leaf({self.bits:#x}/{self.weight})"


class Merge(Node):
    __slots__ = ("left", "right", "prio")

    def __init__(self, left: Node, right: Node, level: int, prio: int):
        self.left = left
        self.right = right
        self.level = level
        self.prio = prio
        self.weight = left.weight + right.weight

    def children(self):
        return [(self.left, 1), (self.right, 1)]

    def __repr__(self):
        layer, phase = layer_phase(self.level)
        return f"Merge(w={self.weight}, L{layer}/{PHASE_NAMES[phase]}/{self.prio})"


class Caterpillar(Node):
    """Run-length encoded repetition of equal-content nodes."""

    __slots__ = ("runs", "count", "_segment_weight")
    is_caterpillar = True
    prio = None

    def __init__(self, runs: tuple[tuple[Node, int], ...], level: int):
        self.runs = runs
        self.level = level
        self.count = sum(c for _, c in runs)
        self.weight = runs[0][0].weight * self.count
        self._segment_weight = min(n.segment_weight for n, _ in runs)

    @property
    def segment_weight(self) -> int:
        return self._segment_weight

    @property
    def segment(self) -> Node:
        return self.runs[0][0]

    def children(self):
        return list(self.runs)

    def __repr__(self):
        layer, _ = layer_phase(self.level)
        return f"Caterpillar(w={self.weight}, x{self.count}, runs={len(self.runs)}, L{layer})"


def normalize_runs(runs) -> tuple[tuple[Node, int], ...]:
    """Merge adjacent runs of the same structure node."""
    out: list[list] = []
    for node, count in runs:
        if count <= 0:
            continue
        if out and out[-1][0] is node:
            out[-1][1] += count
        else:
            out.append([node, count])
    return tuple((n, c) for n, c in out)


class Store:
    """Hash-consing table for structure nodes and their content records.

    Structure equality is kind + child identity + provenance.  Content
    records are keyed by ``(weight, hash)``; equal keys are confirmed by a
    bit comparison over the node trees, and genuine collisions are counted
    in ``collisions``.
    """

    def __init__(self, ring: PolyRing = DEFAULT_RING):
        self.ring = ring
        self._leaves: dict = {}
        self._merges: dict = {}
        self._caterpillars: dict = {}
        self._contents: dict[tuple[int, int], list[Content]] = {}
        self._lock = threading.RLock()
        self.collisions = 0

    def __len__(self):
        return len(self._leaves) + len(self._merges) + len(self._caterpillars)

    @property
    def content_count(self) -> int:
        return sum(len(v) for v in self._contents.values())

    def leaf(self, bits: int, width: int) -> Leaf:
        key = (bits, width)
        node = self._leaves.get(key)
        if node is None:
            if bits < 0 or bits >> width or width <= 0:
                raise ValueError("leaf bits do not fit width")
            with self._lock:
                node = self._leaves.get(key)
                if node is None:
                    node = Leaf(bits, width)
                    self._register(node, self.ring.hash_int(bits, width))
                    self._leaves[key] = node
        return node

    def merge(self, left: Node, right: Node, level: int, prio: int) -> Merge:
        key = (left, right, level, prio)
        node = self._merges.get(key)
        if node is None:
            with self._lock:
                node = self._merges.get(key)
                if node is None:
                    node = Merge(left, right, level, prio)
                    h = self.ring.concat(left.content.hash, right.content.hash, left.weight)
                    self._register(node, h)
                    self._merges[key] = node
        return node

    def caterpillar(self, runs, level: int) -> Caterpillar:
        runs = normalize_runs(runs)
        key = (runs, level)
        node = self._caterpillars.get(key)
        if node is None:
            seg = runs[0][0]
            if any(n.content is not seg.content for n, _ in runs):
                raise ValueError("caterpillar runs must share one bit content")
            with self._lock:
                node = self._caterpillars.get(key)
                if node is None:
                    node = Caterpillar(runs, level)
                    if node.count < 2:
                        raise ValueError("caterpillar needs at least two copies")
                    h = self.ring.repeat(seg.content.hash, seg.weight, node.count)
                    self._register(node, h)
                    self._caterpillars[key] = node
        return node

    def _register(self, node: Node, h: int) -> None:
        key = (node.weight, h)
        bucket = self._contents.get(key)
        if bucket is None:
            node.content = Content(node.weight, h, node)
            self._contents[key] = [node.content]
            return
        from .diffbit import tree_diff

        node.content = None
        for rec in bucket:
            if tree_diff(node, rec.prototype) is None:
                node.content = rec
                return
        self.collisions += 1
        node.content = Content(node.weight, h, node)
        bucket.append(node.content)

    def content_of(self, node: Node) -> Content:
        """Content record of ``node``; re-points the record's prototype at ``node``."""
        rec = node.content
        rec.prototype = node
        return rec


def content_prototype(record: Content) -> Node:
    # read once: the reference may be re-pointed concurrently, always to equal content
    return record.prototype


def intern(node: Node, store: Store) -> Node:
    """Return the canonical handle for a freshly constructed (uninterned) node."""
    if isinstance(node, Leaf):
        return store.leaf(node.bits, node.weight)
    if isinstance(node, Merge):
        return store.merge(node.left, node.right, node.level, node.prio)
    if isinstance(node, Caterpillar):
        return store.caterpillar(node.runs, node.level)
    raise TypeError(node)


def iter_leaves(node: Node) -> Iterator[Leaf]:
    stack: list[tuple[Node, int]] = [(node, 1)]
    while stack:
        n, k = stack.pop()
        if k > 1:
            stack.append((n, k - 1))
        if n.is_leaf:
            yield n
        else:
            stack.extend(reversed(n.children()))


def raw_bits(node: Node) -> BitContent:
    """Materialize the raw bit content of a node (linear in its weight)."""
    value = 0
    pos = 0
    for leaf in iter_leaves(node):
        value |= leaf.bits << pos
        pos += leaf.weight
    return BitContent(value, pos)


def node_depth(node: Node) -> int:
    memo: dict[int, int] = {}
    stack = [node]
    while stack:
        n = stack[-1]
        if id(n) in memo:
            stack.pop()
            continue
        kids = [c for c, _ in n.children()]
        todo = [c for c in kids if id(c) not in memo]
        if todo:
            stack.extend(todo)
            continue
        memo[id(n)] = 1 + max((memo[id(c)] for c in kids), default=0)
        stack.pop()
    return memo[id(node)]


@dataclass(frozen=True)
class AugmentedContent:
    weight_field: BitContent
    hash_field: Optional[BitContent]
    raw: BitContent

    def bits(self) -> BitContent:
        out = self.weight_field
        if self.hash_field is not None:
            out = out + self.hash_field
        return out + self.raw


def augmented(node: Node, layer: int, hash_start_layer: int = 3) -> AugmentedContent:
    if node.weight >> WEIGHT_FIELD_BITS:
        raise UnsupportedSizeError(f"weight {node.weight} does not fit the weight field")
    hash_field = None
    if layer >= hash_start_layer:
        hash_field = encode_number(node.content.hash, HASH_FIELD_BITS)
    return AugmentedContent(encode_number(node.weight, WEIGHT_FIELD_BITS), hash_field, raw_bits(node))
