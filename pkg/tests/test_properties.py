"""Property tests for the invariants the algorithm guarantees."""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from chonkers.bitcontent import hash_bits, hash_concat
from chonkers.chunkcore import DIFFBIT, Store, iter_leaves
from chonkers.diffbit import diffbit_numbers, reduce_orders
from chonkers.pipeline import build_tree, char_config
from chonkers.rebuild import concat, edit_ops
from chonkers.yarn import EMPTY, yarn_concat, yarn_from_text, yarn_replace, yarn_reverse, yarn_slice

CFG = char_config()
# small alphabets make equal runs, caterpillars and ties likely
texts = st.text(alphabet=st.sampled_from("ab\x00\xff"), min_size=1, max_size=400) | \
    st.text(alphabet=st.characters(max_codepoint=255), min_size=1, max_size=400)
bits = st.lists(st.integers(0, 1), max_size=80)


@given(bits, bits)
def test_hash_homomorphism(u, v):
    assert hash_concat(hash_bits(u), hash_bits(v), len(u)) == hash_bits(u + v)


@given(st.lists(st.integers(0, (1 << 127) - 1), min_size=3, max_size=3, unique=True))
def test_consecutive_diffbits_distinct(xs):
    a, b, c = xs
    assert diffbit_numbers(a, b) != diffbit_numbers(b, c)


@given(st.lists(st.integers(0, (1 << 127) - 1), min_size=1, max_size=12), st.data())
def test_fifth_order_small(xs, data):
    # consecutive values distinct, as they are after the caterpillar phase
    first = [xs[0]]
    for x in xs[1:]:
        first.append(x if x != first[-1] else x ^ 1)
    heckd = data.draw(st.lists(st.booleans(), min_size=len(first) - 1, max_size=len(first) - 1))
    assert all(0 <= v <= 5 for v in reduce_orders(first, heckd, 5))


def layers(text):
    seen = {}

    def hook(layer, phase, chunks):
        if phase == DIFFBIT:
            seen[layer] = list(chunks)

    root = build_tree(text, CFG, Store(), hook)
    return root, seen


@settings(max_examples=60, deadline=None)
@given(texts)
def test_weight_guarantees_every_layer(text):
    root, seen = layers(text)
    assert "".join(chr(l.bits) for l in iter_leaves(root)) == text
    for layer, chunks in seen.items():
        u = CFG.schedule.unit(layer)
        for i, c in enumerate(chunks):
            assert c.segment_weight < u or (c.is_leaf and c.weight >= u)
            if not c.is_caterpillar:
                assert c.weight < u or c.is_leaf
            if 4 * c.weight < u:
                for j in (i - 1, i + 1):
                    if 0 <= j < len(chunks):
                        assert c.weight + chunks[j].weight >= u
        for a, b in zip(chunks, chunks[1:]):
            assert not (2 * a.weight < u and 2 * b.weight < u)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(texts, st.data())
def test_edit_equals_scratch(text, data):
    store = Store()
    root = build_tree(text, CFG, store)
    pos = data.draw(st.integers(0, len(text)))
    dl = data.draw(st.integers(0, len(text) - pos))
    ins = data.draw(st.text(alphabet="ab\x00", max_size=20))
    want = text[:pos] + ins + text[pos + dl:]
    got = edit_ops(root, pos, dl, ins, CFG, store)
    assert got is (build_tree(want, CFG, store) if want else None)


@settings(max_examples=40, deadline=None)
@given(texts, texts)
def test_concat_equals_scratch(a, b):
    store = Store()
    got = concat(build_tree(a, CFG, store), build_tree(b, CFG, store), CFG, store)
    assert got is build_tree(a + b, CFG, store)


def Y(s):
    return yarn_from_text(s) if s else EMPTY


ops = st.lists(st.tuples(st.sampled_from(["replace", "concat", "slice", "reverse"]),
                         st.floats(0, 1), st.floats(0, 1), st.text(alphabet="abc", max_size=6)),
               max_size=8)


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet="abc", max_size=60), ops)
def test_yarn_matches_string(start, program):
    s, y = start, Y(start)
    for op, f, g, t in program:
        i = int(f * len(s))
        j = i + int(g * (len(s) - i))
        if op == "replace":
            s, y = s[:i] + t + s[j:], yarn_replace(y, i, j - i, t)
        elif op == "concat":
            s, y = s + t, yarn_concat(y, Y(t))
        elif op == "slice":
            s, y = s[i:j], yarn_slice(y, i, j)
        else:
            s, y = s[::-1], yarn_reverse(y)
        assert y.text() == s
    assert y.root is Y(s).root
