import pytest

from chonkers.chunkcore import Store
from chonkers.diffbit import VisitCounter
from chonkers.pipeline import char_config
from chonkers.errors import EmptyInputError
from chonkers.yarn import (EMPTY, ReverseStats, char_at, fibonacci_word, yarn_compare, yarn_concat, yarn_delete,
                           yarn_equal, yarn_from_text, yarn_insert, yarn_replace, yarn_reverse, yarn_slice)

from conftest import rand_text


def Y(s):
    return yarn_from_text(s) if s else EMPTY


def test_from_text():
    a = Y("a")
    assert len(a) == 1 and a.root.is_leaf
    assert Y("hello") is not Y("hello")  # wrappers differ, handles do not
    assert Y("hello").root is Y("hello").root
    with pytest.raises(EmptyInputError):
        yarn_from_text("")


def test_history_independence():
    assert yarn_concat(Y("ab"), Y("c")).root is yarn_concat(Y("a"), Y("bc")).root
    assert yarn_concat(Y("x"), EMPTY) == Y("x")


def test_fibonacci_lengths():
    fib = [0, 1, 1]
    while len(fib) < 31:
        fib.append(fib[-1] + fib[-2])
    a, b = "1", "0"
    for n in range(3, 16):
        a, b = b, b + a
        assert fibonacci_word(n).text() == b
    assert len(fibonacci_word(30)) == fib[30]


def test_concat_matches_from_text(rng):
    a, b = rand_text(rng, 700), rand_text(rng, 300)
    assert yarn_concat(Y(a), Y(b)) == Y(a + b)


def test_edits():
    y = Y("bc")
    assert yarn_delete(y, 2, 2) == y
    assert yarn_insert(y, 0, "x") == Y("xbc")
    assert yarn_replace(Y("hello"), 1, 3, "ipp") == Y("hippo")
    assert yarn_delete(Y("abc"), 0, 3) == EMPTY
    with pytest.raises(IndexError):
        yarn_delete(y, 2, 1)


def test_random_edits_vs_string(rng):
    s = rand_text(rng, 500, alphabet=4)
    y = Y(s)
    for _ in range(100):
        i = rng.randrange(len(s) + 1)
        j = rng.randrange(i, min(len(s), i + 20) + 1)
        ins = rand_text(rng, rng.randrange(0, 5), alphabet=4)
        s = s[:i] + ins + s[j:]
        y = yarn_replace(y, i, j - i, ins)
        assert y.text() == s
    assert y == Y(s)


def test_equal():
    x = Y("abcdef")
    assert yarn_equal(x, x)
    assert yarn_equal(yarn_concat(Y("abc"), Y("def")), x)
    assert not yarn_equal(Y("abcdeg"), x)


def test_compare():
    c = yarn_compare(Y("abc"), Y("abd"))
    assert (c.order, c.index) == (-1, 2)
    c = yarn_compare(Y("abc"), Y("abc"))
    assert (c.order, c.index) == (0, None)
    assert yarn_compare(Y("ab"), Y("abc")).order == -1
    assert yarn_compare(Y("abc"), Y("ab")).order == 1
    assert yarn_compare(EMPTY, Y("a")).order == -1
    assert yarn_compare(Y("é"), Y("z")).order == 1


def test_compare_sublinear(rng):
    s = rand_text(rng, 10_000)
    t = s[:7000] + chr((ord(s[7000]) + 1) % 256) + s[7001:]
    stats = VisitCounter()
    c = yarn_compare(Y(s), Y(t), stats)
    assert c.index == 7000
    assert c.order == (-1 if s[7000] < t[7000] else 1)
    assert stats.visits < 500


def test_reverse():
    assert yarn_reverse(Y("ab")) == Y("ba")
    y = Y("the quick brown fox")
    assert yarn_reverse(yarn_reverse(y)).root is y.root
    assert yarn_reverse(EMPTY) == EMPTY


def test_reverse_random(rng):
    for _ in range(20):
        s = rand_text(rng, rng.randrange(1, 400), alphabet=3)
        assert yarn_reverse(Y(s)) == Y(s[::-1])


def test_fibonacci_palindrome_20():
    # own store: the shared default store may already hold cached reversals
    cfg = char_config()
    w = fibonacci_word(20, cfg, Store(cfg.ring))
    cut = yarn_slice(w, 0, len(w) - 2)
    stats = ReverseStats()
    assert yarn_reverse(cut, stats) == cut
    text = cut.text()
    assert text == text[::-1]
    assert stats.computed > 0


def test_slice(rng):
    s = rand_text(rng, 1000)
    y = Y(s)
    assert yarn_slice(y, 0, 1000) is not None and yarn_slice(y, 0, 1000) == y
    assert yarn_slice(y, 5, 5) == EMPTY
    for _ in range(20):
        i = rng.randrange(1000)
        j = rng.randrange(i, 1001)
        assert yarn_slice(y, i, j).text() == s[i:j]
        assert y[i:j] == Y(s[i:j])


def test_char_at():
    y = Y("hello world")
    assert char_at(y, 4) == "o" and y[-1] == "d"
    with pytest.raises(IndexError):
        char_at(y, 11)
