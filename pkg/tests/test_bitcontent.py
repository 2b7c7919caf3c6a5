import pytest

from chonkers.bitcontent import (DEFAULT_RING, BitContent, PolyHash, PolyRing, encode_number, hash_bits,
                                 hash_concat, pow_base)
from chonkers.errors import ConfigurationError

SMALL = PolyRing(base=2, modulus=101)


@pytest.mark.parametrize("n,width,bits", [(5, 4, [1, 0, 1, 0]), (0, 3, [0, 0, 0]), (1, 1, [1])])
def test_encode_number(n, width, bits):
    assert encode_number(n, width).bits == bits


def test_encode_number_overflow():
    with pytest.raises(ValueError):
        encode_number(8, 3)


def test_from_bytes_reading_order():
    c = BitContent.from_bytes(b"\x80\x01")
    assert c.bits == [1] + [0] * 7 + [0] * 7 + [1]
    assert c.to_bytes() == b"\x80\x01"


def test_concat_bits():
    a = BitContent.from_bits([1, 0])
    b = BitContent.from_bits([0, 1, 1])
    assert (a + b).bits == [1, 0, 0, 1, 1]


@pytest.mark.parametrize("bits,h", [([1], 1), ([1, 1], 3), ([], 0)])
def test_hash_small_ring(bits, h):
    assert SMALL.hash_bits(bits).value == h


def test_hash_concat_small_ring():
    one = SMALL.hash_bits([1])
    assert SMALL.hash_concat(one, one, 1).value == 3


def test_hash_concat_right_empty():
    u = hash_bits([1, 0, 1, 1])
    assert hash_concat(u, hash_bits([]), 4) == u


def test_hash_concat_matches_direct(rng):
    for _ in range(200):
        lu, lv = rng.randrange(65), rng.randrange(65)
        u = [rng.randrange(2) for _ in range(lu)]
        v = [rng.randrange(2) for _ in range(lv)]
        assert hash_concat(hash_bits(u), hash_bits(v), lu) == hash_bits(u + v)


def test_pow_base():
    assert pow_base(0) == 1
    assert pow_base(1) == DEFAULT_RING.base
    assert SMALL.pow_base(10) == 1024 % 101


def test_repeat_matches_concat():
    h = DEFAULT_RING.hash_int(0b1011, 4)
    # 0b1011 repeated as a 4-bit block, LSB-first positions
    block = 0b1011
    value = sum(block << (4 * k) for k in range(7))
    assert DEFAULT_RING.repeat(h, 4, 7) == DEFAULT_RING.hash_int(value, 28)


def test_mixed_rings_rejected():
    with pytest.raises(ConfigurationError):
        hash_concat(PolyHash(1), PolyHash(1, base=2, modulus=101), 1)
    with pytest.raises(ConfigurationError):
        PolyRing(base=0, modulus=101)
