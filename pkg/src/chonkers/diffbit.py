"""Diffbits: first differing bit position and direction, and their iteration.

The diffbit of two bit sequences is ``2*i + d`` where ``i`` is the first
index at which they differ and ``d`` is 1 when the bit goes from 0 (left)
to 1 (right).
"""

from __future__ import annotations

from typing import Optional, Sequence

from .bitcontent import BitContent
from .chunkcore import HASH_FIELD_BITS, WEIGHT_FIELD_BITS, Node
from .errors import InvariantError, UndefinedDiffbitError

DEFAULT_ORDERS = 5


def _low_index(x: int) -> int:
    return (x & -x).bit_length() - 1


def diffbit_bits(left: BitContent, right: BitContent) -> int:
    n = min(left.length, right.length)
    x = (left.value ^ right.value) & ((1 << n) - 1)
    if not x:
        raise UndefinedDiffbitError("no differing bit within the common length")
    i = _low_index(x)
    return 2 * i + ((right.value >> i) & 1)


def diffbit_numbers(left: int, right: int) -> int:
    """Diffbit of the LSB-first binary representations of two numbers."""
    if left == right:
        raise UndefinedDiffbitError(f"equal numbers {left}")
    i = _low_index(left ^ right)
    return 2 * i + ((right >> i) & 1)


def fictitious(value: int) -> int:
    """Diffbit against a neighbour that differs at bit 0."""
    return 0 if value & 1 else 1


class VisitCounter:
    def __init__(self):
        self.visits = 0


def tree_diff(a: Node, b: Node, stats: Optional[VisitCounter] = None,
              offset_a: int = 0, offset_b: int = 0) -> Optional[tuple[int, int]]:
    """First difference between the raw contents of ``a`` and ``b``.

    Compares ``a`` from ``offset_a`` against ``b`` from ``offset_b``.
    Returns ``(index, direction)`` relative to the offsets, or ``None`` if the
    two suffixes are identical.  If one suffix is a proper prefix of the
    other, the index is the shorter length and the missing bit is taken to
    be the complement of the present one.

    Shared subtrees, shared content records and phase-aligned caterpillars
    over the same segment are skipped without descending.
    """
    len_a = a.weight - offset_a
    len_b = b.weight - offset_b
    n = min(len_a, len_b)
    found = _diff(a, offset_a, b, offset_b, n, stats)
    if found is not None:
        return found
    if len_a == len_b:
        return None
    if len_a > len_b:
        bit = _bit_at(a, offset_a + n)
        return n, 1 - bit
    return n, _bit_at(b, offset_b + n)


def _bit_at(node: Node, pos: int) -> int:
    while not node.is_leaf:
        for child, count in node.children():
            span = child.weight * count
            if pos < span:
                pos %= child.weight
                node = child
                break
            pos -= span
    return (node.bits >> pos) & 1


def _diff(a, oa, b, ob, n, stats):
    # explicit stack; tasks are pushed right-to-left so the leftmost difference is found first
    stack = [(a, oa, b, ob, n, 0)]
    visits = 0
    pop = stack.pop
    push = stack.append
    while stack:
        a, oa, b, ob, n, base = pop()
        visits += 1
        if n <= 0:
            continue
        if a is b and oa == ob:
            continue
        if oa == 0 and ob == 0 and a.content is b.content:
            continue
        if a.is_leaf and b.is_leaf:
            x = ((a.bits >> oa) ^ (b.bits >> ob)) & ((1 << n) - 1)
            if x:
                i = _low_index(x)
                if stats is not None:
                    stats.visits += visits
                return base + i, (b.bits >> (ob + i)) & 1
            continue
        if a.is_caterpillar and b.is_caterpillar and a.segment.content is b.segment.content:
            if (oa - ob) % a.segment.weight == 0:
                continue
        if a.is_leaf or (not b.is_leaf and b.weight > a.weight):
            # split b
            tasks = []
            for child, cs, lo, hi in _pieces(b, ob, n):
                tasks.append((a, oa + (lo - ob), child, lo - cs, hi - lo, base + (lo - ob)))
        else:
            tasks = []
            for child, cs, lo, hi in _pieces(a, oa, n):
                tasks.append((child, lo - cs, b, ob + (lo - oa), hi - lo, base + (lo - oa)))
        tasks.reverse()
        stack.extend(tasks)
    if stats is not None:
        stats.visits += visits
    return None


def _pieces(node, off, n):
    """Children copies of ``node`` overlapping ``[off, off+n)``: (child, start, lo, hi)."""
    end = off + n
    pos = 0
    out = []
    for child, count in node.children():
        w = child.weight
        span = w * count
        if pos + span <= off:
            pos += span
            continue
        if pos >= end:
            break
        first = max(0, (off - pos) // w)
        last = min(count, -(-(end - pos) // w))
        for k in range(first, last):
            cs = pos + k * w
            out.append((child, cs, max(off, cs), min(end, cs + w)))
        pos += span
    return out


def diffbit_over_trees(left: Node, right: Node, stats: Optional[VisitCounter] = None):
    return tree_diff(left, right, stats)


def augmented_diffbit(a: Node, b: Node, with_hash: bool) -> int:
    """Diffbit of the augmented contents (weight field, optional hash, raw bits)."""
    wa, wb = a.weight, b.weight
    if wa != wb:
        i = _low_index(wa ^ wb)
        return 2 * i + ((wb >> i) & 1)
    skip = WEIGHT_FIELD_BITS
    if with_hash:
        ha, hb = a.content.hash, b.content.hash
        if ha != hb:
            i = _low_index(ha ^ hb)
            return 2 * (skip + i) + ((hb >> i) & 1)
        skip += HASH_FIELD_BITS
    if a.is_leaf and b.is_leaf:
        x = a.bits ^ b.bits
        if not x:
            raise UndefinedDiffbitError("equal augmented contents")
        i = _low_index(x)
        return 2 * (skip + i) + ((b.bits >> i) & 1)
    found = tree_diff(a, b)
    if found is None:
        raise UndefinedDiffbitError("equal augmented contents")
    i, d = found
    return 2 * (skip + i) + d


def first_order_diffbit(chunk: Node, right: Optional[Node], layer: int, unit: int,
                        hash_start_layer: int = 3) -> int:
    if right is not None and chunk.weight + right.weight < unit:
        try:
            return augmented_diffbit(chunk, right, layer >= hash_start_layer)
        except UndefinedDiffbitError as exc:
            raise InvariantError("heckin' neighbours with equal content after caterpillar phase") from exc
    return fictitious(chunk.weight)


def reduce_orders(first: Sequence[int], heckd: Sequence[bool], orders: int = DEFAULT_ORDERS) -> list[int]:
    """Iterate first-order diffbits up to order ``orders`` for every chunk.

    ``heckd[i]`` says whether the boundary right of chunk ``i`` is heck'd;
    a missing or non-heck'd right boundary uses the fictitious neighbour at
    every order.
    """
    cur = list(first)
    n = len(cur)
    for _ in range(orders - 1):
        nxt = [0] * n
        for i in range(n):
            v = cur[i]
            if i + 1 < n and heckd[i]:
                w = cur[i + 1]
                x = v ^ w
                if not x:
                    raise InvariantError("consecutive diffbits are equal")
                k = (x & -x).bit_length() - 1
                nxt[i] = 2 * k + ((w >> k) & 1)
            else:
                nxt[i] = 0 if v & 1 else 1
        cur = nxt
    return cur


def highest_order_diffbit(chunks: Sequence[Node], layer: int, unit: int, orders: int = DEFAULT_ORDERS,
                          hash_start_layer: int = 3) -> int:
    """Merge priority of ``chunks[0]`` given its right neighbours in ``chunks``.

    Boundaries beyond the end of ``chunks`` are treated as missing.
    """
    n = len(chunks)
    heckd = [chunks[i].weight + chunks[i + 1].weight < unit for i in range(n - 1)]
    first = [first_order_diffbit(chunks[i], chunks[i + 1] if i + 1 < n else None, layer, unit, hash_start_layer)
             for i in range(n)]
    return reduce_orders(first, heckd, orders)[0]
