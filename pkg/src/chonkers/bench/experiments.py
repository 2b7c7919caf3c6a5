"""The measurements behind the CLI: weights, locality, phase census, dedup."""

from __future__ import annotations

import hashlib
import statistics
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..chunkcore import BALANCING, CATERPILLAR, DIFFBIT, Node, Store, layer_phase
from ..pipeline import ChunkerConfig, build_tree, chunks_at_layer, tree_height
from ..rebuild import edit_ops

# census buckets in table order
BUCKETS = (("balancing", 0), ("balancing", 1), ("caterpillar", None)) + tuple(("diffbit", p) for p in range(6))
BUCKET_LABELS = ("balancing_0", "balancing_1", "caterpillar", "diffbit_0", "diffbit_1", "diffbit_2",
                 "diffbit_3", "diffbit_4", "diffbit_5")


# weight statistics


@dataclass
class LayerWeights:
    layer: int
    average: float
    sigma: float
    max_segment: float
    min_pair: Optional[float]


def layer_weights(chunks: Sequence[Node], unit: int, layer: int) -> LayerWeights:
    ws = [c.weight / unit for c in chunks]
    pairs = [a + b for a, b in zip(ws, ws[1:])]
    return LayerWeights(
        layer,
        statistics.fmean(ws),
        statistics.pstdev(ws),
        max(c.segment_weight for c in chunks) / unit,
        min(pairs) if pairs else None,
    )


def weight_profile(text, config: ChunkerConfig, store: Optional[Store] = None) -> list[LayerWeights]:
    """Per-layer weight figures of one input, for every layer its tree has."""
    rows: list[LayerWeights] = []

    def hook(layer, phase, chunks):
        if phase == DIFFBIT:
            rows.append(layer_weights(chunks, config.schedule.unit(layer), layer))

    build_tree(text, config, store if store is not None else Store(config.ring), hook)
    return rows


@dataclass
class Summary:
    mean: float
    sd: float
    lo: float
    hi: float

    @classmethod
    def of(cls, xs: Sequence[float]) -> "Summary":
        xs = list(xs)
        return cls(statistics.fmean(xs), statistics.pstdev(xs), min(xs), max(xs))


@dataclass
class WeightStatsRow:
    layer: int
    count: int
    average: Summary
    sigma: Summary
    max_segment: Summary
    min_pair: Optional[Summary]


def aggregate_weights(profiles: Iterable[list[LayerWeights]]) -> list[WeightStatsRow]:
    by_layer: dict[int, list[LayerWeights]] = {}
    for prof in profiles:
        for row in prof:
            by_layer.setdefault(row.layer, []).append(row)
    out = []
    for layer in sorted(by_layer):
        rows = by_layer[layer]
        pairs = [r.min_pair for r in rows if r.min_pair is not None]
        out.append(WeightStatsRow(
            layer, len(rows),
            Summary.of(r.average for r in rows),
            Summary.of(r.sigma for r in rows),
            Summary.of(r.max_segment for r in rows),
            Summary.of(pairs) if pairs else None,
        ))
    return out


# locality


def boundaries(root: Optional[Node], layer: int, proto_width: int) -> set[int]:
    """Interior chunk boundaries of ``layer``, in proto-chunk positions."""
    if root is None:
        return set()
    top = tree_height(root)
    chunks = chunks_at_layer(root, min(layer, top)) if top else [root]
    out = set()
    pos = 0
    for c in chunks[:-1]:
        pos += c.weight
        out.add(pos // proto_width)
    return out


def deletion_extents(old: set[int], new: set[int], edit: int) -> tuple[int, int]:
    """Left and right extent (in proto-chunks) of boundary changes after deleting ``edit``.

    Right of the edit, new positions are shifted by one to line up with the
    old ones; the right extent is the distance from the edit to the last
    position where the two sets disagree.  Left of the edit no shift is
    needed and the extent reaches back to the first disagreement.
    """
    right = {p for p in old ^ {q + 1 for q in new} if p > edit}
    left = {p for p in old ^ new if p < edit}
    return (edit - min(left) if left else 0), (max(right) - edit if right else 0)


@dataclass
class LocalitySample:
    layer: int
    left: float
    right: float


def locality_samples(text, config: ChunkerConfig, store: Optional[Store] = None, edits: int = 9) -> list[LocalitySample]:
    """Delete one proto-chunk at ``edits`` evenly spaced positions and measure per layer.

    Extents are reported in absolute units of each layer.
    """
    store = store if store is not None else Store(config.ring)
    root = build_tree(text, config, store)
    n = root.weight // config.proto_width
    height = tree_height(root)
    old = {L: boundaries(root, L, config.proto_width) for L in range(1, height + 1)}
    out = []
    for k in range(1, edits + 1):
        e = k * n // (edits + 1)
        new_root = edit_ops(root, e, 1, "", config, store)
        for L in range(1, height + 1):
            left, right = deletion_extents(old[L], boundaries(new_root, L, config.proto_width), e)
            scale = config.proto_width / config.schedule.unit(L)
            out.append(LocalitySample(L, left * scale, right * scale))
    return out


@dataclass
class LocalityStatsRow:
    layer: int
    count: int
    left_mean: float
    left_sd: float
    left_max: float
    right_mean: float
    right_sd: float
    right_max: float


def aggregate_locality(samples: Iterable[LocalitySample]) -> list[LocalityStatsRow]:
    by_layer: dict[int, list[LocalitySample]] = {}
    for s in samples:
        by_layer.setdefault(s.layer, []).append(s)
    rows = []
    for layer in sorted(by_layer):
        ss = by_layer[layer]
        ls = [s.left for s in ss]
        rs = [s.right for s in ss]
        rows.append(LocalityStatsRow(layer, len(ss), statistics.fmean(ls), statistics.pstdev(ls), max(ls),
                                     statistics.fmean(rs), statistics.pstdev(rs), max(rs)))
    return rows


# phase census


def bucket_of(node: Node) -> Optional[tuple[str, Optional[int]]]:
    if node.is_leaf:
        return None
    _, phase = layer_phase(node.level)
    if phase == CATERPILLAR:
        return ("caterpillar", None)
    return ("balancing" if phase == BALANCING else "diffbit", node.prio)


def census(root: Node) -> Counter:
    """Merge nodes per ``(layer, bucket)``, counting every occurrence in the tree.

    Shared subtrees are counted once per occurrence; the count per node is
    memoized so that repetitive inputs stay cheap.
    """
    memo: dict[int, Counter] = {}
    stack = [root]
    while stack:
        n = stack[-1]
        if id(n) in memo:
            stack.pop()
            continue
        kids = n.children()
        todo = [c for c, _ in kids if id(c) not in memo]
        if todo:
            stack.extend(todo)
            continue
        stack.pop()
        acc: Counter = Counter()
        for c, k in kids:
            sub = memo[id(c)]
            if k == 1:
                acc.update(sub)
            else:
                for key, v in sub.items():
                    acc[key] += v * k
        b = bucket_of(n)
        if b is not None:
            acc[(layer_phase(n.level)[0], b)] += 1
        memo[id(n)] = acc
    return memo[id(root)]


@dataclass
class CensusRow:
    layer: str
    percent: tuple[float, ...]


def census_table(counts: Counter) -> list[CensusRow]:
    layers = sorted({layer for layer, _ in counts})
    rows = []

    def row(name, keys):
        total = sum(counts[k] for k in keys)
        if not total:
            return CensusRow(name, tuple(0.0 for _ in BUCKETS))
        per = Counter()
        for (layer, b) in keys:
            per[b] += counts[(layer, b)]
        return CensusRow(name, tuple(100.0 * per[b] / total for b in BUCKETS))

    if layers:
        rows.append(row("All", list(counts)))
    for layer in layers:
        rows.append(row(str(layer), [k for k in counts if k[0] == layer]))
    return rows


# dedup


@dataclass
class DedupReport:
    total_bytes: int = 0
    unique_bytes: int = 0
    chunks: int = 0
    chunk_sizes: list = field(default_factory=list, repr=False)

    @property
    def ratio(self) -> float:
        return self.total_bytes / self.unique_bytes if self.unique_bytes else 1.0

    @property
    def avg_chunk(self) -> float:
        return statistics.fmean(self.chunk_sizes) if self.chunk_sizes else 0.0

    @property
    def sd_chunk(self) -> float:
        return statistics.pstdev(self.chunk_sizes) if self.chunk_sizes else 0.0


def chunk_records(root: Node, config: ChunkerConfig, layer: Optional[int] = None) -> list[tuple[int, Node]]:
    """``(bit offset, chunk)`` for the output of ``layer`` (default: the last scheduled layer)."""
    layer = config.schedule.final_layer if layer is None else layer
    top = tree_height(root)
    chunks = chunks_at_layer(root, min(layer, top)) if top else [root]
    out = []
    pos = 0
    for c in chunks:
        out.append((pos, c))
        pos += c.weight
    return out


def _changed_positions(old: bytes, new: bytes, block: int = 4096) -> list[int]:
    out = []
    for start in range(0, len(old), block):
        a = old[start:start + block]
        b = new[start:start + block]
        if a != b:
            out.extend(start + i for i, (x, y) in enumerate(zip(a, b)) if x != y)
    return out


class DedupIndex:
    """Unique final-layer chunk contents, keyed by digest with a byte check."""

    def __init__(self):
        self.seen: dict[bytes, bytes] = {}
        # versions each unique chunk occurs in, as a bit mask
        self.versions: dict[bytes, int] = {}
        self.report = DedupReport()

    def unique_bytes_in(self, versions: Iterable[int]) -> int:
        """Unique chunk bytes of the given versions alone."""
        mask = 0
        for v in versions:
            mask |= 1 << v
        return sum(len(self.seen[k]) for k, m in self.versions.items() if m & mask)

    def add_file(self, data: bytes, root: Optional[Node], config: ChunkerConfig, version: int = 0) -> None:
        self.report.total_bytes += len(data)
        if root is None:
            return
        w = config.proto_width
        for off, c in chunk_records(root, config):
            start = off // w
            length = c.weight // w
            self.report.chunks += 1
            self.report.chunk_sizes.append(length * w // 8)
            # a caterpillar stores its segment once
            if c.is_caterpillar:
                length = c.segment.weight // w
            piece = data[start:start + length]
            key = hashlib.sha256(piece).digest()
            prev = self.seen.get(key)
            self.versions[key] = self.versions.get(key, 0) | (1 << version)
            if prev is None:
                self.seen[key] = piece
                self.report.unique_bytes += len(piece)
            elif prev != piece:  # pragma: no cover - would need a sha256 collision
                raise AssertionError("digest collision")


def dedup_versions(version_dirs: Sequence[Path], config: ChunkerConfig, incremental: bool = True,
                   index: Optional[DedupIndex] = None) -> DedupReport:
    """Chunk every file of every version and count unique chunk bytes.

    Files are matched across versions by relative path.  With
    ``incremental``, a file of the same length as its previous version is
    derived from the previous tree by splicing in the changed bytes.
    """
    dirs = [Path(d) for d in version_dirs]
    names: list[str] = sorted({str(p.relative_to(d)) for d in dirs for p in d.rglob("*") if p.is_file()})
    index = index if index is not None else DedupIndex()
    for name in names:
        store = Store(config.ring)
        prev_data = None
        prev_root = None
        for version, d in enumerate(dirs):
            path = d / name
            if not path.is_file():
                continue
            data = path.read_bytes()
            root = None
            if data:
                if (incremental and config.proto_width == 8 and prev_root is not None
                        and len(prev_data) == len(data)):
                    root = prev_root
                    for pos in _changed_positions(prev_data, data):
                        root = edit_ops(root, pos * 8 // config.proto_width, 1, data[pos:pos + 1], config, store)
                else:
                    root = build_tree(data, config, store)
            index.add_file(data, root, config, version)
            prev_data, prev_root = data, root
    return index.report
