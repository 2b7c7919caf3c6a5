"""Yarn: history-independent deduplicated strings on top of chonker trees.

A Yarn is a chonker tree over 32-bit code points.  Because the tree of a
sequence is unique, equal strings built in any way share one root handle,
so equality is a pointer comparison.  The empty string is a sentinel with
no tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .chunkcore import Node, Store, iter_leaves
from .diffbit import VisitCounter, tree_diff
from .errors import ConfigurationError, EmptyInputError
from .pipeline import CHAR32, ChunkerConfig, build_tree, char_config
from .rebuild import concat, edit_ops, slice_tree

DEFAULT_CONFIG = char_config()
DEFAULT_STORE = Store(DEFAULT_CONFIG.ring)

_BITS = 32


@dataclass(frozen=True)
class Yarn:
    root: Optional[Node]
    config: ChunkerConfig = DEFAULT_CONFIG
    store: Store = DEFAULT_STORE

    def __post_init__(self):
        if self.config.granularity != CHAR32:
            raise ConfigurationError("Yarn needs char32 proto-chunks")

    def __len__(self):
        return 0 if self.root is None else self.root.weight // _BITS

    @property
    def length(self) -> int:
        return len(self)

    def __eq__(self, other):
        if not isinstance(other, Yarn):
            return NotImplemented
        return yarn_equal(self, other)

    def __hash__(self):
        return id(self.root)

    def __str__(self):
        return self.text()

    def __repr__(self):
        n = len(self)
        if n <= 20:
            return f"Yarn({self.text()!r})"
        return f"Yarn(<{n} chars>)"

    def text(self) -> str:
        if self.root is None:
            return ""
        return "".join(chr(leaf.bits) for leaf in iter_leaves(self.root))

    def _with(self, root: Optional[Node]) -> "Yarn":
        return Yarn(root, self.config, self.store)

    # method forms of the module functions
    def __add__(self, other: "Yarn") -> "Yarn":
        return yarn_concat(self, other)

    def __getitem__(self, i):
        if isinstance(i, slice):
            start, stop, step = i.indices(len(self))
            if step != 1:
                raise ValueError("only contiguous slices")
            return yarn_slice(self, start, max(start, stop))
        return char_at(self, i)

    def reverse(self) -> "Yarn":
        return yarn_reverse(self)


def empty(config: ChunkerConfig = DEFAULT_CONFIG, store: Store = DEFAULT_STORE) -> Yarn:
    return Yarn(None, config, store)


EMPTY = empty()


def yarn_from_text(text: str, config: ChunkerConfig = DEFAULT_CONFIG, store: Store = DEFAULT_STORE) -> Yarn:
    if not text:
        raise EmptyInputError("use empty() for the empty Yarn")
    return Yarn(build_tree(text, config, store), config, store)


def _same_space(a: Yarn, b: Yarn) -> None:
    if a.store is not b.store or not a.config.compatible(b.config):
        raise ConfigurationError("Yarns from different stores or configs")


def yarn_concat(a: Yarn, b: Yarn) -> Yarn:
    _same_space(a, b)
    return a._with(concat(a.root, b.root, a.config, a.store))


def yarn_replace(y: Yarn, position: int, deleted: int, text: str) -> Yarn:
    return y._with(edit_ops(y.root, position, deleted, text, y.config, y.store))


def yarn_insert(y: Yarn, position: int, text: str) -> Yarn:
    return yarn_replace(y, position, 0, text)


def yarn_delete(y: Yarn, start: int, end: int) -> Yarn:
    if end < start:
        raise IndexError(f"delete range [{start}, {end}) is reversed")
    return yarn_replace(y, start, end - start, "")


def yarn_slice(y: Yarn, start: int, end: int) -> Yarn:
    return y._with(slice_tree(y.root, start, end, y.config, y.store))


def yarn_equal(a: Yarn, b: Yarn) -> bool:
    return a.root is b.root


def char_at(y: Yarn, index: int) -> str:
    n = len(y)
    if index < 0:
        index += n
    if not 0 <= index < n:
        raise IndexError(index)
    return chr(_leaf_at(y.root, index * _BITS).bits)


def _leaf_at(node: Node, pos: int):
    while not node.is_leaf:
        for child, count in node.children():
            span = child.weight * count
            if pos < span:
                pos %= child.weight
                node = child
                break
            pos -= span
    return node


@dataclass(frozen=True)
class Comparison:
    order: int
    index: Optional[int] = None


def yarn_compare(a: Yarn, b: Yarn, stats: Optional[VisitCounter] = None) -> Comparison:
    """Lexicographic order by code point, with the first differing index.

    When one string is a prefix of the other the shorter one sorts first
    and no index is reported.
    """
    if a.root is b.root:
        return Comparison(0)
    la, lb = len(a), len(b)
    if a.root is None or b.root is None:
        return Comparison(-1 if la < lb else 1)
    found = tree_diff(a.root, b.root, stats)
    if found is None:
        return Comparison(0)
    i = found[0] // _BITS
    if i >= min(la, lb):
        return Comparison(-1 if la < lb else 1)
    ca = _leaf_at(a.root, i * _BITS).bits
    cb = _leaf_at(b.root, i * _BITS).bits
    return Comparison(-1 if ca < cb else 1, i)


class ReverseStats:
    def __init__(self):
        self.computed = 0
        self.hits = 0


def yarn_reverse(y: Yarn, stats: Optional[ReverseStats] = None) -> Yarn:
    """Character-order reversal, memoized per content record."""
    if y.root is None:
        return y
    return y._with(_reverse(y.root, y.config, y.store, stats))


def _reverse(node: Node, config: ChunkerConfig, store: Store, stats: Optional[ReverseStats]) -> Node:
    key = ("reverse", config)
    cache = node.content.cache
    hit = cache.get(key)
    if hit is not None:
        if stats is not None:
            stats.hits += 1
        return hit
    if stats is not None:
        stats.computed += 1
    if node.is_leaf:
        out = node
    elif node.is_caterpillar:
        out = _power(_reverse(node.segment, config, store, stats), node.count, config, store)
    else:
        out = concat(_reverse(node.right, config, store, stats), _reverse(node.left, config, store, stats),
                     config, store)
    # only roots built from scratch are cached, never inner nodes, which may
    # not be the canonical tree of their own content
    cache[key] = out
    return out


def _power(root: Node, k: int, config: ChunkerConfig, store: Store) -> Node:
    result = None
    base = root
    while k:
        if k & 1:
            result = concat(result, base, config, store)
        k >>= 1
        if k:
            base = concat(base, base, config, store)
    return result


def fibonacci_word(n: int, config: ChunkerConfig = DEFAULT_CONFIG, store: Store = DEFAULT_STORE) -> Yarn:
    """w1 = "1", w2 = "0", wn = w(n-1) w(n-2), built by concatenation."""
    if n < 1:
        raise ValueError("Fibonacci words start at n = 1")
    a = yarn_from_text("1", config, store)
    if n == 1:
        return a
    b = yarn_from_text("0", config, store)
    for _ in range(n - 2):
        a, b = b, yarn_concat(b, a)
    return b
