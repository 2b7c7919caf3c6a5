"""The three per-layer phases and priority-based merging.

All phase functions take and return plain lists of interned nodes.  When a
phase runs on a window cut out of a longer list (tree rebuilding), the
``open_left``/``open_right`` flags say that the list continues beyond that
end, and a parallel list of taint flags marks output chunks whose structure
may depend on what lies outside the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .chunkcore import BALANCING, CATERPILLAR, DIFFBIT, Node, Store, level_of
from .diffbit import DEFAULT_ORDERS, augmented_diffbit, reduce_orders
from .errors import InvariantError

BALANCING_PRIORITIES = (0, 1)
DIFFBIT_PRIORITIES = (0, 1, 2, 3, 4, 5)


@dataclass
class LayerContext:
    store: Store
    layer: int
    unit: int
    hash_start_layer: int = 3
    orders: int = DEFAULT_ORDERS
    check: bool = False

    @property
    def with_hash(self) -> bool:
        return self.layer >= self.hash_start_layer

    def level(self, phase: int) -> int:
        return level_of(self.layer, phase)


def compare(a: Node, b: Node, with_hash: bool) -> int:
    """Order by weight, then lexicographically by augmented content (-1, 0, 1)."""
    wa, wb = a.weight, b.weight
    if wa != wb:
        return -1 if wa < wb else 1
    if a.content is b.content:
        return 0
    # direction 1 means the left sequence has the 0 bit at the first difference
    return -1 if augmented_diffbit(a, b, with_hash) & 1 else 1


def merged_taint(left: bool, right: bool) -> bool:
    """Taint of a merge result: tainted if either constituent is."""
    return left or right


def blocked_taint(left: bool, right: bool, by_weight: bool) -> bool:
    """Whether a blocked pair becomes tainted.

    A weight block depends on both weights; a determinism block depends on
    the right chunk's right boundary, so only the right chunk matters.
    """
    return (left or right) if by_weight else right


def priority_merge(chunks: list, prios: list, unit: int, store: Store, level: int,
                   priorities: Sequence[int], taint: Optional[list] = None):
    """Eliminate boundaries in ascending priority order.

    ``prios[i]`` is the priority of the boundary between ``chunks[i]`` and
    ``chunks[i+1]`` (or ``None``).  A boundary at priority ``p`` is removed
    if the pair is still heckin' and the right chunk's right boundary does
    not also carry ``p``.  Merged chunks keep their outer boundary
    priorities.  Returns ``(chunks, prios, taint)``.
    """
    merge = store.merge
    n = len(chunks)
    if n < 2:
        return list(chunks), list(prios), (list(taint) if taint is not None else None)
    # chunks are named by the index of their leftmost input chunk, boundaries
    # by the index of the input chunk on their left; both names are stable
    node = list(chunks)
    weight = [c.weight for c in chunks]
    alive = [True] * n
    right_end = list(range(n))          # boundary on the right of each live chunk
    owner = list(range(n))              # live chunk on the left of each boundary
    flags = list(taint) if taint is not None else None
    last = n - 1
    by_prio: dict = {}
    for i, p in enumerate(prios):
        if p is not None:
            by_prio.setdefault(p, []).append(i)
    for p in priorities:
        for b in by_prio.get(p, ()):
            left = owner[b]
            right = b + 1
            rb = right_end[right]
            heck = weight[left] + weight[right] < unit
            det = rb == last or prios[rb] != p
            if heck and det:
                node[left] = merge(node[left], node[right], level, p)
                weight[left] += weight[right]
                alive[right] = False
                right_end[left] = rb
                owner[rb] = left
                if flags is not None:
                    flags[left] = merged_taint(flags[left], flags[right])
            elif flags is not None and blocked_taint(flags[left], flags[right], not heck):
                flags[left] = flags[right] = True
    keep = [i for i in range(n) if alive[i]]
    out_prios = [prios[right_end[i]] for i in keep[:-1]]
    out_taint = [flags[i] for i in keep] if flags is not None else None
    return [node[i] for i in keep], out_prios, out_taint


def balancing_priorities(chunks: Sequence[Node], with_hash: bool) -> list:
    n = len(chunks)
    cmp = [compare(chunks[i], chunks[i + 1], with_hash) for i in range(n - 1)]
    is_min = [(i == 0 or cmp[i - 1] > 0) and (i == n - 1 or cmp[i] < 0) for i in range(n)]
    prios: list = [None] * (n - 1)
    for i in range(n - 1):
        if is_min[i]:
            if is_min[i + 1]:
                raise InvariantError("two adjacent locally minimal chunks")
            prios[i] = 0
        elif is_min[i + 1]:
            prios[i] = 1
    return prios


def balancing_phase(chunks: list, ctx: LayerContext, open_left: bool = False, open_right: bool = False,
                    with_taint: bool = False):
    """Merge chunks lighter than all neighbours, right at priority 0, left at 1."""
    n = len(chunks)
    if ctx.check and not (open_left or open_right):
        check_no_consecutive_kittens(chunks, ctx.unit)
    if n < 2:
        return (list(chunks), [open_left or open_right] * n) if with_taint else list(chunks)
    prios = balancing_priorities(chunks, ctx.with_hash)
    taint = None
    if with_taint:
        taint = [False] * n
        if open_left:
            taint[0] = True
        if open_right:
            # the right boundary of the second-to-last chunk depends on what follows the window
            taint[-1] = True
            taint[-2] = True
    out, _, taint = priority_merge(chunks, prios, ctx.unit, ctx.store, ctx.level(BALANCING),
                                   BALANCING_PRIORITIES, taint)
    if ctx.check and not (open_left or open_right):
        check_balancing_post(out, ctx.unit)
    return (out, taint) if with_taint else out


def caterpillar_phase(chunks: list, ctx: LayerContext, left_runs=(), right_runs=()):
    """Turn maximal runs of equal-content chunks into caterpillars.

    ``left_runs``/``right_runs`` are ``(node, count)`` runs that continue the
    first/last run of ``chunks`` from outside the list; they must have the
    same content as the chunk they attach to.
    """
    level = ctx.level(CATERPILLAR)
    caterpillar = ctx.store.caterpillar
    n = len(chunks)
    out = []
    i = 0
    while i < n:
        c = chunks[i].content
        j = i + 1
        while j < n and chunks[j].content is c:
            j += 1
        runs = [(x, 1) for x in chunks[i:j]]
        if i == 0 and left_runs:
            runs = list(left_runs) + runs
        if j == n and right_runs:
            runs = runs + list(right_runs)
        if sum(k for _, k in runs) >= 2:
            out.append(caterpillar(runs, level))
        else:
            out.append(chunks[i])
        i = j
    if n == 0 and (left_runs or right_runs):
        runs = list(left_runs) + list(right_runs)
        out.append(caterpillar(runs, level) if sum(k for _, k in runs) >= 2 else runs[0][0])
    if ctx.check:
        check_caterpillar_post(out)
    return out


def diffbit_priorities(chunks: Sequence[Node], ctx: LayerContext, open_right: bool = False):
    """Highest-order diffbit priorities; also returns which chunks' values are reliable."""
    n = len(chunks)
    unit = ctx.unit
    with_hash = ctx.with_hash
    heckd = [chunks[i].weight + chunks[i + 1].weight < unit for i in range(n - 1)]
    first = []
    for i in range(n):
        c = chunks[i]
        if i < n - 1 and heckd[i]:
            first.append(augmented_diffbit(c, chunks[i + 1], with_hash))
        else:
            first.append(0 if c.weight & 1 else 1)
    top = reduce_orders(first, heckd, ctx.orders)
    prios = [top[i] if heckd[i] else None for i in range(n - 1)]
    known = [True] * n
    if open_right and n:
        known[-1] = False
        for _ in range(ctx.orders - 1):
            known = [known[i] and (i == n - 1 or not heckd[i] or known[i + 1]) for i in range(n)]
    return prios, known


def diffbit_phase(chunks: list, ctx: LayerContext, open_left: bool = False, open_right: bool = False,
                  with_taint: bool = False):
    n = len(chunks)
    if n < 2:
        return (list(chunks), [open_left or open_right] * n) if with_taint else list(chunks)
    prios, known = diffbit_priorities(chunks, ctx, open_right)
    taint = None
    if with_taint:
        taint = [not k for k in known]
        if open_left:
            taint[0] = True
    out, _, taint = priority_merge(chunks, prios, ctx.unit, ctx.store, ctx.level(DIFFBIT),
                                   DIFFBIT_PRIORITIES, taint)
    if ctx.check and not (open_left or open_right):
        check_diffbit_post(out, ctx.unit)
    return (out, taint) if with_taint else out


# postcondition checks


def check_no_consecutive_kittens(chunks: Sequence[Node], unit: int) -> None:
    for a, b in zip(chunks, chunks[1:]):
        if 4 * a.weight < unit and 4 * b.weight < unit:
            raise InvariantError(f"consecutive kittens {a!r} {b!r} at unit {unit}")


def check_balancing_post(chunks: Sequence[Node], unit: int) -> None:
    for i, c in enumerate(chunks):
        if 4 * c.weight < unit:
            for j in (i - 1, i + 1):
                if 0 <= j < len(chunks) and c.weight + chunks[j].weight < unit:
                    raise InvariantError(f"kitten {c!r} is heckin' with {chunks[j]!r}")


def check_caterpillar_post(chunks: Sequence[Node]) -> None:
    for a, b in zip(chunks, chunks[1:]):
        if a.content is b.content:
            raise InvariantError(f"consecutive equal chunks {a!r} {b!r}")


def check_diffbit_post(chunks: Sequence[Node], unit: int) -> None:
    for a, b in zip(chunks, chunks[1:]):
        if 2 * a.weight < unit and 2 * b.weight < unit:
            raise InvariantError(f"adjacent chunks {a!r} {b!r} both below half a unit")
