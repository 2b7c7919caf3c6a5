"""Layer schedules and bottom-up construction of chonker trees."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .bitcontent import DEFAULT_RING, REVERSED_BYTE, PolyRing
from .chunkcore import BALANCING, CATERPILLAR, DIFFBIT, Node, Store, layer_phase, level_of
from .diffbit import DEFAULT_ORDERS
from .errors import ConfigurationError, EmptyInputError
from .phases import LayerContext, balancing_phase, caterpillar_phase, diffbit_phase

BYTE8 = "byte8"
CHAR32 = "char32"
PROTO_WIDTH = {BYTE8: 8, CHAR32: 32}
# enough layers for any input that fits in memory
DEFAULT_LAYERS = 48


@dataclass(frozen=True)
class LayerSchedule:
    """Absolute units per layer (layer 1 first).

    Layers past the end of ``units`` keep doubling the last unit.
    """

    units: tuple[int, ...]
    hash_start_layer: int = 3

    def __post_init__(self):
        if not self.units:
            raise ConfigurationError("empty schedule")
        if self.units[0] < 2:
            raise ConfigurationError("absolute unit must be at least 2 bits")
        for a, b in zip(self.units, self.units[1:]):
            if not a < b <= 2 * a:
                raise ConfigurationError(f"units must grow by a factor in (1, 2]: {a} -> {b}")

    def unit(self, layer: int) -> int:
        if layer <= len(self.units):
            return self.units[layer - 1]
        return self.units[-1] << (layer - len(self.units))

    @property
    def final_layer(self) -> int:
        return len(self.units)

    @property
    def final_unit(self) -> int:
        return self.units[-1]

    def validate_proto_weight(self, min_proto_bits: int) -> None:
        # no kittens may enter the first balancing phase
        if 4 * min_proto_bits < self.units[0]:
            raise ConfigurationError(
                f"first unit {self.units[0]} is more than 4x the smallest proto-chunk ({min_proto_bits} bits)")


def formula_unit(granularity: str, n: int) -> int:
    return 1 + PROTO_WIDTH[granularity] * (1 << n)


def default_schedule(granularity: str = CHAR32, target_unit: Optional[int] = None,
                     hash_start_layer: int = 3) -> LayerSchedule:
    """Units ``1 + w * 2**n`` for proto width ``w``, ending at ``target_unit``.

    If the target is not on the formula, the schedule halves back from the
    target (rounding up) until it meets the first formula unit, so the one
    irregular step happens at the bottom.  ``None`` gives a long pure formula
    schedule.
    """
    if granularity not in PROTO_WIDTH:
        raise ConfigurationError(f"unknown granularity {granularity!r}")
    first = formula_unit(granularity, 1)
    if target_unit is None:
        return LayerSchedule(tuple(formula_unit(granularity, n) for n in range(1, DEFAULT_LAYERS + 1)),
                             hash_start_layer)
    if target_unit < first:
        raise ValueError(f"target unit {target_unit} below the first layer unit {first}")
    units = []
    n = 1
    while formula_unit(granularity, n) <= target_unit:
        units.append(formula_unit(granularity, n))
        n += 1
    if units[-1] == target_unit:
        return LayerSchedule(tuple(units), hash_start_layer)
    back = []
    t = target_unit
    while t > first:
        back.append(t)
        t = -(-t // 2)
    return LayerSchedule((first,) + tuple(reversed(back)), hash_start_layer)


@dataclass(frozen=True)
class ChunkerConfig:
    granularity: str = CHAR32
    schedule: LayerSchedule = field(default_factory=lambda: default_schedule(CHAR32))
    ring: PolyRing = DEFAULT_RING
    orders: int = DEFAULT_ORDERS
    check: bool = False

    def __post_init__(self):
        if self.granularity not in PROTO_WIDTH:
            raise ConfigurationError(f"unknown granularity {self.granularity!r}")
        self.schedule.validate_proto_weight(self.proto_width)

    @property
    def proto_width(self) -> int:
        return PROTO_WIDTH[self.granularity]

    @property
    def hash_start_layer(self) -> int:
        return self.schedule.hash_start_layer

    def compatible(self, other: "ChunkerConfig") -> bool:
        return (self.granularity, self.schedule, self.ring, self.orders) == (
            other.granularity, other.schedule, other.ring, other.orders)

    def context(self, store: Store, layer: int) -> LayerContext:
        return LayerContext(store, layer, self.schedule.unit(layer), self.hash_start_layer,
                            self.orders, self.check)


def char_config(target_unit: Optional[int] = None, **kw) -> ChunkerConfig:
    return ChunkerConfig(CHAR32, default_schedule(CHAR32, target_unit), **kw)


def byte_config(target_unit: Optional[int] = None, **kw) -> ChunkerConfig:
    return ChunkerConfig(BYTE8, default_schedule(BYTE8, target_unit), **kw)


def proto_chunks(data: Union[bytes, str, Sequence[int]], config: ChunkerConfig, store: Store) -> list[Node]:
    """Wrap input units into interned leaves.

    byte8: each byte, bits most significant first.  char32: each code point,
    32 bits least significant first; bytes input must be valid UTF-8.
    """
    leaf = store.leaf
    if config.granularity == BYTE8:
        if isinstance(data, str):
            data = data.encode("utf-8")
        cache = {}
        out = []
        for b in data:
            node = cache.get(b)
            if node is None:
                node = cache[b] = leaf(REVERSED_BYTE[b], 8)
            out.append(node)
        return out
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        data = [ord(ch) for ch in data]
    cache = {}
    out = []
    for cp in data:
        node = cache.get(cp)
        if node is None:
            if not 0 <= cp < 1 << 32:
                raise ValueError(f"code point {cp} out of range")
            node = cache[cp] = leaf(cp, 32)
        out.append(node)
    return out


LayerHook = Callable[[int, int, list], None]


def run_layer(chunks: list, config: ChunkerConfig, store: Store, layer: int,
              hook: Optional[LayerHook] = None) -> list:
    ctx = config.context(store, layer)
    chunks = balancing_phase(chunks, ctx)
    if hook:
        hook(layer, BALANCING, chunks)
    chunks = caterpillar_phase(chunks, ctx)
    if hook:
        hook(layer, CATERPILLAR, chunks)
    chunks = diffbit_phase(chunks, ctx)
    if hook:
        hook(layer, DIFFBIT, chunks)
    return chunks


def build_from_chunks(chunks: list, config: ChunkerConfig, store: Store, hook: Optional[LayerHook] = None,
                      stop_layer: Optional[int] = None) -> list:
    layer = 0
    while len(chunks) > 1 and (stop_layer is None or layer < stop_layer):
        layer += 1
        chunks = run_layer(chunks, config, store, layer, hook)
    return chunks


def build_tree(data, config: Optional[ChunkerConfig] = None, store: Optional[Store] = None,
               hook: Optional[LayerHook] = None) -> Node:
    """Chunk ``data`` layer by layer until a single root chunk remains."""
    config = config or ChunkerConfig()
    store = store if store is not None else Store(config.ring)
    chunks = proto_chunks(data, config, store)
    if not chunks:
        raise EmptyInputError("cannot chunk empty input")
    return build_from_chunks(chunks, config, store, hook)[0]


def chunk_layer(data, config: ChunkerConfig, store: Store, layer: Optional[int] = None) -> list[Node]:
    """Output chunks of ``layer`` (default: the schedule's final layer)."""
    layer = config.schedule.final_layer if layer is None else layer
    chunks = proto_chunks(data, config, store)
    if not chunks:
        raise EmptyInputError("cannot chunk empty input")
    return build_from_chunks(chunks, config, store, stop_layer=layer)


def tree_height(root: Node) -> int:
    """Number of layers that ran to produce ``root`` (0 for a lone proto-chunk)."""
    return layer_phase(root.level)[0]


def chunks_at_layer(root: Node, layer: int, phase: int = DIFFBIT) -> list[Node]:
    """The output list of ``(layer, phase)``, recovered from provenance.

    Layers above the root's own layer are not distinguishable from the final
    list, but only layers up to the root's are accepted.
    """
    top = layer_phase(root.level)[0]
    if layer < 0 or layer > max(top, 0):
        raise ValueError(f"layer {layer} beyond tree height {top}")
    if layer == 0:
        cut = 0
    else:
        cut = level_of(layer, phase)
    out: list[Node] = []
    stack: list[tuple[Node, int]] = [(root, 1)]
    while stack:
        n, k = stack.pop()
        if n.level <= cut:
            out.extend([n] * k)
            continue
        if k > 1:
            stack.append((n, k - 1))
        stack.extend(reversed(n.children()))
    return out
