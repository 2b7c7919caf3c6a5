"""Bit sequences and the polynomial fingerprint used to augment chunk contents.

A bit sequence is stored as a Python ``int`` together with its length: bit
position ``i`` of the sequence (counting from the left, i.e. in data order)
is ``(value >> i) & 1``.  This makes "position 0 = leftmost" and the
LSB-first encoding of numbers coincide, so numbers can be embedded in bit
content without any reversal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import ConfigurationError

# largest prime below 2**32
DEFAULT_MODULUS = 4294967291
DEFAULT_BASE = 2654435761


@dataclass(frozen=True)
class BitContent:
    """An ordered sequence of bits, position 0 leftmost."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("negative length")
        if self.value < 0 or self.value >> self.length:
            raise ValueError("value does not fit in length")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitContent":
        value = 0
        n = 0
        for n, b in enumerate(bits, 1):
            if b not in (0, 1):
                raise ValueError(f"not a bit: {b!r}")
            value |= b << (n - 1)
        return cls(value, n)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitContent":
        """Bits of ``data`` in reading order, most significant bit first per byte."""
        value = 0
        for k, byte in enumerate(data):
            value |= REVERSED_BYTE[byte] << (8 * k)
        return cls(value, 8 * len(data))

    def to_bytes(self) -> bytes:
        if self.length % 8:
            raise ValueError("length is not a whole number of bytes")
        return bytes(REVERSED_BYTE[(self.value >> (8 * k)) & 0xFF] for k in range(self.length // 8))

    @property
    def bits(self) -> list[int]:
        return [(self.value >> i) & 1 for i in range(self.length)]

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.value >> i) & 1

    def __add__(self, other: "BitContent") -> "BitContent":
        return BitContent(self.value | (other.value << self.length), self.length + other.length)


def _reverse_byte(b: int) -> int:
    return int(f"{b:08b}"[::-1], 2)


REVERSED_BYTE: tuple[int, ...] = tuple(_reverse_byte(b) for b in range(256))


def encode_number(n: int, width: int) -> BitContent:
    """``width`` bits holding ``n`` least significant bit first."""
    if n < 0 or n >> width:
        raise ValueError(f"{n} does not fit in {width} bits")
    return BitContent(n, width)


@dataclass(frozen=True)
class PolyHash:
    value: int
    base: int = DEFAULT_BASE
    modulus: int = DEFAULT_MODULUS


class PolyRing:
    """Polynomial fingerprint ``sum(bit_i * base**i) mod modulus``.

    The fingerprint is a monoid homomorphism: the hash of ``u || v`` is
    ``h(u) + base**len(u) * h(v)``.
    """

    def __init__(self, base: int = DEFAULT_BASE, modulus: int = DEFAULT_MODULUS):
        if modulus < 2 or not 1 <= base < modulus:
            raise ConfigurationError(f"bad ring constants base={base} modulus={modulus}")
        self.base = base
        self.modulus = modulus
        self.pow = lru_cache(maxsize=1 << 16)(self._pow)

    def __repr__(self):
        return f"PolyRing(base={self.base}, modulus={self.modulus})"

    def __eq__(self, other):
        return isinstance(other, PolyRing) and (self.base, self.modulus) == (other.base, other.modulus)

    def __hash__(self):
        return hash((self.base, self.modulus))

    def _pow(self, exponent: int) -> int:
        return pow(self.base, exponent, self.modulus)

    def hash_int(self, value: int, length: int) -> int:
        """Hash of the ``length``-bit sequence stored in ``value``."""
        m = self.modulus
        pw = self.pow
        h = 0
        while value:
            low = value & -value
            h += pw(low.bit_length() - 1)
            value ^= low
        return h % m

    def concat(self, left: int, right: int, left_len: int) -> int:
        return (left + self.pow(left_len) * right) % self.modulus

    def repeat(self, h: int, length: int, count: int) -> int:
        """Hash of ``count`` back-to-back copies of a ``length``-bit sequence hashing to ``h``."""
        acc, acc_len = 0, 0
        part, part_len = h, length
        while count:
            if count & 1:
                acc = self.concat(acc, part, acc_len)
                acc_len += part_len
            count >>= 1
            if count:
                part = self.concat(part, part, part_len)
                part_len *= 2
        return acc

    # value-level API

    def hash_bits(self, c: BitContent | Sequence[int]) -> PolyHash:
        if not isinstance(c, BitContent):
            c = BitContent.from_bits(c)
        return PolyHash(self.hash_int(c.value, c.length), self.base, self.modulus)

    def hash_concat(self, left: PolyHash, right: PolyHash, left_len: int) -> PolyHash:
        for h in (left, right):
            if (h.base, h.modulus) != (self.base, self.modulus):
                raise ConfigurationError("hash computed under a different ring")
        return PolyHash(self.concat(left.value, right.value, left_len), self.base, self.modulus)

    def pow_base(self, exponent: int) -> int:
        return self.pow(exponent)


DEFAULT_RING = PolyRing()


def hash_bits(c: BitContent | Sequence[int], ring: PolyRing = DEFAULT_RING) -> PolyHash:
    return ring.hash_bits(c)


def hash_concat(left: PolyHash, right: PolyHash, left_len: int) -> PolyHash:
    if (left.base, left.modulus) != (right.base, right.modulus):
        raise ConfigurationError("hashes from different rings")
    return PolyRing(left.base, left.modulus).hash_concat(left, right, left_len)


def pow_base(exponent: int, ring: PolyRing = DEFAULT_RING) -> int:
    return ring.pow(exponent)
