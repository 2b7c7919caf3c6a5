"""Incremental rebuilding of chonker trees.

A splice keeps a prefix of one tree, a suffix of another (or the same) tree
and puts new proto-chunks between them.  It replays the chunking bottom-up,
one level (layer/phase) at a time, but only for a work list around the cut:

* the prefix zipper sheds whole items of the current level into the left
  end of the work list until a safety radius is covered, the suffix zipper
  does the same on the right;
* the phase runs on the work list with both ends marked as open, and taint
  marks every output item whose structure could depend on what lies
  outside the list;
* tainted end items are handed back to the zippers (the old tree already
  holds the right structure there), and the untainted middle becomes the
  work list of the next level.

If the give-back lands too close to the edit, or on a position that is not
an item boundary of the old tree, the radius is doubled and the phase is
redone.  Once the zippers are empty and one item remains, that item is the
root, identical to the one a from-scratch build would intern.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .chunkcore import BALANCING, CATERPILLAR, Node, Store, iter_leaves, layer_phase
from .errors import ConfigurationError
from .phases import balancing_phase, blocked_taint, diffbit_phase, merged_taint
from .pipeline import ChunkerConfig, proto_chunks

PREFIX = "prefix"
SUFFIX = "suffix"

# safety radius in units of the layer's absolute unit, and the minimum
# distance a give-back point must keep from the edited region
SHED_LEFT = 24
SHED_RIGHT = 18
GUARD_LEFT = 12
GUARD_RIGHT = 9
# the same in items, for stretches of heavy items such as caterpillars
SHED_ITEMS = 32
GUARD_ITEMS = 16


class _Frontier:
    """Items on one side of a cut, as a stack of ``[node, count]`` runs.

    Entries may be nodes of a higher level than the one asked for; they are
    expanded on demand.  For a prefix the top of the stack is the rightmost
    run, for a suffix the leftmost.
    """

    __slots__ = ("stack", "prefix")

    def __init__(self, stack: list, prefix: bool):
        self.stack = stack
        self.prefix = prefix

    def __bool__(self):
        return bool(self.stack)

    def peek(self, level: int) -> Optional[tuple[Node, int]]:
        st = self.stack
        while st:
            node, count = st[-1]
            if node.level <= level:
                return node, count
            if count == 1:
                st.pop()
            else:
                st[-1] = (node, count - 1)
            kids = node.children()
            st.extend(kids if self.prefix else reversed(kids))
        return None

    def pop(self, level: int) -> Optional[Node]:
        top = self.peek(level)
        if top is None:
            return None
        node, count = top
        if count == 1:
            self.stack.pop()
        else:
            self.stack[-1] = (node, count - 1)
        return node

    def pop_run(self, level: int) -> Optional[tuple[Node, int]]:
        top = self.peek(level)
        if top is not None:
            self.stack.pop()
        return top


def _frontier(root: Optional[Node], pos: int, level: int, prefix: bool) -> Optional[_Frontier]:
    """Items of ``level`` left (prefix) or right (suffix) of bit ``pos``.

    Returns ``None`` if ``pos`` cuts through an item of that level.
    """
    if root is None:
        return _Frontier([], prefix)
    if pos == 0 or pos == root.weight:
        inside = (pos == root.weight) == prefix
        return _Frontier([(root, 1)] if inside else [], prefix)
    stack: list = []
    node, off = root, 0
    while True:
        if node.level <= level:
            return None
        kids = node.children()
        for j, (child, count) in enumerate(kids):
            w = child.weight
            span = w * count
            if off + span <= pos:
                if prefix:
                    stack.append((child, count))
                off += span
                continue
            k, rem = divmod(pos - off, w)
            if prefix:
                if k:
                    stack.append((child, k))
            else:
                # runs right of the cut, pushed so that the leftmost ends on top
                stack.extend(reversed(kids[j + 1:]))
                after = count - k - (1 if rem else 0)
                if after:
                    stack.append((child, after))
            if rem == 0:
                return _Frontier(stack, prefix)
            off += k * w
            node = child
            break


@dataclass(frozen=True)
class TreeZipper:
    """A cut through a chonker tree at a bit position.

    A ``prefix`` zipper stands for everything left of ``position``, a
    ``suffix`` zipper for everything right of it.  A ``None`` root is an
    empty sequence.
    """

    root: Optional[Node]
    position: int
    side: str = PREFIX

    def __post_init__(self):
        if self.side not in (PREFIX, SUFFIX):
            raise ValueError(f"side must be {PREFIX!r} or {SUFFIX!r}")
        total = 0 if self.root is None else self.root.weight
        if not 0 <= self.position <= total:
            raise IndexError(f"cut {self.position} outside [0, {total}]")

    @classmethod
    def prefix_of(cls, root: Optional[Node], position: int) -> "TreeZipper":
        return cls(root, position, PREFIX)

    @classmethod
    def suffix_of(cls, root: Optional[Node], position: int) -> "TreeZipper":
        return cls(root, position, SUFFIX)

    @property
    def weight(self) -> int:
        """Bits on the kept side of the cut."""
        if self.side == PREFIX:
            return self.position
        return (0 if self.root is None else self.root.weight) - self.position

    def moved(self, position: int) -> "TreeZipper":
        return TreeZipper(self.root, position, self.side)

    def is_boundary(self, level: int) -> bool:
        return _frontier(self.root, self.position, level, self.side == PREFIX) is not None

    def frontier(self, level: int) -> Optional[_Frontier]:
        return _frontier(self.root, self.position, level, self.side == PREFIX)

    def path(self) -> list[tuple[Node, int]]:
        """Root-to-focus list of ``(node, offset)`` down to the leaf at the cut.

        The focus is the last leaf of a prefix or the first leaf of a suffix.
        """
        if self.root is None or self.weight == 0:
            return []
        target = self.position - 1 if self.side == PREFIX else self.position
        out = []
        node, off = self.root, 0
        while True:
            out.append((node, off))
            if node.is_leaf:
                return out
            for child, count in node.children():
                span = child.weight * count
                if target < off + span:
                    off += (target - off) // child.weight * child.weight
                    node = child
                    break
                off += span

    @property
    def focus(self) -> Optional[Node]:
        p = self.path()
        return p[-1][0] if p else None


@dataclass
class WorkItem:
    chunk: Node
    right_priority: Optional[int] = None
    tainted: bool = False


def propagate_taint(items: Sequence[WorkItem], events: Iterable[tuple[str, int]]) -> list[WorkItem]:
    """Replay merge events over a work list and spread taint.

    ``events`` are ``("merge", i)``, ``("blocked_weight", i)`` or
    ``("blocked_priority", i)`` for the pair ``items[i], items[i+1]`` of
    the list as it stands when the event happens.  Merge events need the
    node store, so here the merged item keeps the left chunk as a stand-in;
    only the flags are of interest.
    """
    out = [WorkItem(x.chunk, x.right_priority, x.tainted) for x in items]
    for kind, i in events:
        a, b = out[i], out[i + 1]
        if kind == "merge":
            out[i:i + 2] = [WorkItem(a.chunk, b.right_priority, merged_taint(a.tainted, b.tainted))]
        elif kind in ("blocked_weight", "blocked_priority"):
            if blocked_taint(a.tainted, b.tainted, kind == "blocked_weight"):
                a.tainted = b.tainted = True
        else:
            raise ValueError(f"unknown event {kind!r}")
    return out


def _group_runs(runs: list, level: int, store: Store) -> list:
    out = []
    i = 0
    n = len(runs)
    while i < n:
        content = runs[i][0].content
        j = i + 1
        while j < n and runs[j][0].content is content:
            j += 1
        group = runs[i:j]
        if sum(c for _, c in group) >= 2:
            out.append(store.caterpillar(group, level))
        else:
            out.append(group[0][0])
        i = j
    return out


def caterpillar_fuse(prefix: TreeZipper, items: list, suffix: TreeZipper, level: int,
                     store: Store) -> tuple[TreeZipper, list, TreeZipper]:
    """Caterpillar phase for a splice, producing level ``level`` items.

    Takes the item next to each cut together with every adjacent item of
    equal content, so that runs crossing a cut are joined; the cuts move
    back to the start/end of those runs.  The result is exact, no taint.
    """
    below = level - 1
    left = prefix.frontier(below)
    right = suffix.frontier(below)
    if left is None or right is None:
        raise AssertionError("zipper not on an item boundary")
    lruns: list = []
    lw = 0
    top = left.pop_run(below)
    if top is not None:
        lruns.append(top)
        lw += top[0].weight * top[1]
        c = top[0].content
        while True:
            nxt = left.peek(below)
            if nxt is None or nxt[0].content is not c:
                break
            left.pop_run(below)
            lruns.append(nxt)
            lw += nxt[0].weight * nxt[1]
    lruns.reverse()
    rruns: list = []
    rw = 0
    top = right.pop_run(below)
    if top is not None:
        rruns.append(top)
        rw += top[0].weight * top[1]
        c = top[0].content
        while True:
            nxt = right.peek(below)
            if nxt is None or nxt[0].content is not c:
                break
            right.pop_run(below)
            rruns.append(nxt)
            rw += nxt[0].weight * nxt[1]
    runs = lruns + [(x, 1) for x in items] + rruns
    out = _group_runs(runs, level, store)
    return prefix.moved(prefix.position - lw), out, suffix.moved(suffix.position + rw)


class _Retry(Exception):
    pass


def _window_phase(prefix: TreeZipper, items: list, suffix: TreeZipper, ctx, phase: int, level: int,
                  scale: int) -> tuple[TreeZipper, list, TreeZipper]:
    below = level - 1
    unit = ctx.unit
    left = prefix.frontier(below)
    right = suffix.frontier(below)
    if left is None or right is None:
        raise AssertionError("zipper not on an item boundary")
    shed_l = []
    wl = 0
    while left and (wl < SHED_LEFT * scale * unit or len(shed_l) < SHED_ITEMS * scale):
        n = left.pop(below)
        shed_l.append(n)
        wl += n.weight
    shed_l.reverse()
    shed_r = []
    wr = 0
    while right and (wr < SHED_RIGHT * scale * unit or len(shed_r) < SHED_ITEMS * scale):
        n = right.pop(below)
        shed_r.append(n)
        wr += n.weight
    open_l = bool(left)
    open_r = bool(right)
    work = shed_l + list(items) + shed_r
    run = balancing_phase if phase == BALANCING else diffbit_phase
    out, taint = run(work, ctx, open_l, open_r, with_taint=True)
    clean = [i for i, t in enumerate(taint) if not t]
    if not clean:
        raise _Retry
    a, b = clean[0], clean[-1]
    if b - a + 1 != len(clean):
        raise _Retry
    lead = sum(x.weight for x in out[:a])
    trail = sum(x.weight for x in out[b + 1:])
    if (lead and not open_l) or (trail and not open_r):
        raise _Retry
    new_p = prefix.position - wl + lead
    new_q = suffix.position + wr - trail
    if open_l:
        # the kept prefix must end well before the edit
        margin_w = 0
        margin_n = 0
        pos = prefix.position - wl
        for x in shed_l:
            if pos >= new_p:
                margin_w += x.weight
                margin_n += 1
            pos += x.weight
        if margin_w < GUARD_LEFT * unit or margin_n < GUARD_ITEMS:
            raise _Retry
    if open_r:
        margin_w = 0
        margin_n = 0
        pos = suffix.position
        for x in shed_r:
            pos += x.weight
            if pos <= new_q:
                margin_w += x.weight
                margin_n += 1
        if margin_w < GUARD_RIGHT * unit or margin_n < GUARD_ITEMS:
            raise _Retry
    new_prefix = prefix.moved(new_p)
    new_suffix = suffix.moved(new_q)
    if not new_prefix.is_boundary(level) or not new_suffix.is_boundary(level):
        raise _Retry
    return new_prefix, out[a:b + 1], new_suffix


def _proto_width(root: Optional[Node]) -> Optional[int]:
    if root is None:
        return None
    return next(iter_leaves(root)).weight


SpliceTrace = Callable[[int, TreeZipper, list, TreeZipper], None]


def splice(prefix: TreeZipper, middle, suffix: TreeZipper, config: Optional[ChunkerConfig] = None,
           store: Optional[Store] = None, trace: Optional[SpliceTrace] = None) -> Optional[Node]:
    """Root of the tree for ``prefix ‖ middle ‖ suffix``.

    ``middle`` is raw input (``str``/``bytes``) or a list of proto-chunk
    leaves.  Returns ``None`` for an empty result.  ``trace`` is called
    with ``(level, prefix, items, suffix)`` after every level.
    """
    config = config or ChunkerConfig()
    store = store if store is not None else Store(config.ring)
    if prefix.side != PREFIX or suffix.side != SUFFIX:
        raise ValueError("splice needs a prefix zipper and a suffix zipper")
    for z in (prefix, suffix):
        w = _proto_width(z.root)
        if w is not None and w != config.proto_width:
            raise ConfigurationError(f"tree built from {w}-bit proto-chunks, config expects {config.proto_width}")
    if middle is None:
        items = []
    elif isinstance(middle, (str, bytes, bytearray)):
        items = proto_chunks(middle, config, store)
    else:
        items = list(middle)
        if items and not isinstance(items[0], Node):
            items = proto_chunks(items, config, store)
    # a cut at the very end (or start) of a side is the empty side
    if prefix.weight == 0:
        prefix = TreeZipper(None, 0, PREFIX)
    if suffix.weight == 0:
        suffix = TreeZipper(None, 0, SUFFIX)
    level = 0
    while True:
        if prefix.weight == 0 and suffix.weight == 0 and len(items) <= 1:
            return items[0] if items else None
        # one kept side with nothing new: the old subtree is already right
        if not items and suffix.weight == 0 and prefix.position == prefix.root.weight:
            return prefix.root
        if not items and prefix.weight == 0 and suffix.position == 0:
            return suffix.root
        level += 1
        layer, phase = layer_phase(level)
        ctx = config.context(store, layer)
        if phase == CATERPILLAR:
            prefix, items, suffix = caterpillar_fuse(prefix, items, suffix, level, store)
        else:
            scale = 1
            while True:
                try:
                    prefix, items, suffix = _window_phase(prefix, items, suffix, ctx, phase, level, scale)
                    break
                except _Retry:
                    scale *= 2
        if trace is not None:
            trace(level, prefix, items, suffix)


def _cut(config: ChunkerConfig, index: int) -> int:
    return index * config.proto_width


def edit_ops(root: Optional[Node], position: int, deleted_count: int, inserted, config: Optional[ChunkerConfig] = None,
             store: Optional[Store] = None) -> Optional[Node]:
    """Delete ``deleted_count`` proto-chunks at ``position`` and insert ``inserted`` there."""
    config = config or ChunkerConfig()
    total = 0 if root is None else root.weight // config.proto_width
    if position < 0 or deleted_count < 0 or position + deleted_count > total:
        raise IndexError(f"edit [{position}, {position + deleted_count}) outside [0, {total}]")
    if deleted_count == 0 and not inserted:
        return root
    return splice(TreeZipper(root, _cut(config, position), PREFIX), inserted,
                  TreeZipper(root, _cut(config, position + deleted_count), SUFFIX), config, store)


def concat(left: Optional[Node], right: Optional[Node], config: Optional[ChunkerConfig] = None,
           store: Optional[Store] = None) -> Optional[Node]:
    if left is None:
        return right
    if right is None:
        return left
    return splice(TreeZipper(left, left.weight, PREFIX), [], TreeZipper(right, 0, SUFFIX), config, store)


def slice_tree(root: Optional[Node], start: int, end: int, config: Optional[ChunkerConfig] = None,
               store: Optional[Store] = None) -> Optional[Node]:
    """Tree of proto-chunks ``[start, end)``."""
    config = config or ChunkerConfig()
    total = 0 if root is None else root.weight // config.proto_width
    if not 0 <= start <= end <= total:
        raise IndexError(f"slice [{start}, {end}) outside [0, {total}]")
    if start == end:
        return None
    head = root
    if end < total:
        head = splice(TreeZipper(root, _cut(config, end), PREFIX), [], TreeZipper(None, 0, SUFFIX), config, store)
    if start == 0:
        return head
    return splice(TreeZipper(None, 0, PREFIX), [], TreeZipper(head, _cut(config, start), SUFFIX), config, store)
