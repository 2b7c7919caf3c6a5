import pytest

from chonkers.chunkcore import DIFFBIT, BALANCING, Store, iter_leaves
from chonkers.errors import ConfigurationError, EmptyInputError
from chonkers.pipeline import (BYTE8, CHAR32, ChunkerConfig, LayerSchedule, build_tree, byte_config, char_config,
                               chunk_layer, chunks_at_layer, default_schedule, formula_unit, tree_height)

from conftest import rand_text


def test_char32_schedule_formula():
    assert default_schedule(CHAR32, 257).units == (65, 129, 257)
    assert default_schedule(CHAR32).units[:3] == (65, 129, 257)


def test_byte8_12k_schedule():
    units = default_schedule(BYTE8, 12 * 1024 * 8).units
    assert units[-1] == 98304
    assert units[0] == formula_unit(BYTE8, 1) == 17
    for a, b in zip(units, units[1:]):
        assert a < b <= 2 * a
    # the off-formula step is the first one
    assert units[1:] == tuple(98304 >> k for k in range(len(units) - 2, -1, -1))


def test_schedule_single_layer():
    assert default_schedule(CHAR32, 65).units == (65,)


def test_schedule_validation():
    with pytest.raises(ConfigurationError):
        LayerSchedule((17, 40))
    with pytest.raises(ConfigurationError):
        LayerSchedule(())
    with pytest.raises(ValueError):
        default_schedule(CHAR32, 10)
    with pytest.raises(ConfigurationError):
        ChunkerConfig(BYTE8, LayerSchedule((65, 129)))


def test_one_byte_input():
    s = Store()
    root = build_tree(b"x", byte_config(), s)
    assert root is s.leaf(int(f"{ord('x'):08b}"[::-1], 2), 8)
    assert tree_height(root) == 0


def test_empty_input():
    with pytest.raises(EmptyInputError):
        build_tree(b"", byte_config())


def test_deterministic_handles(rng, cfg, store):
    text = rand_text(rng, 2000)
    assert build_tree(text, cfg, store) is build_tree(text, cfg, store)


def test_random_string_weights(rng, cfg, store):
    text = rand_text(rng, 10_000)
    seen = {}

    def hook(layer, phase, chunks):
        if phase == DIFFBIT:
            seen[layer] = sum(c.weight for c in chunks) / len(chunks) / cfg.schedule.unit(layer)

    build_tree(text, cfg, store, hook)
    assert abs(seen[1] - 0.87) <= 0.03
    assert abs(seen[3] - 0.74) <= 0.03


def test_chunks_at_layer_matches_capture(rng, cfg, store):
    text = rand_text(rng, 3000)
    captured = {}

    def hook(layer, phase, chunks):
        captured[(layer, phase)] = list(chunks)

    root = build_tree(text, cfg, store, hook)
    assert [l.bits for l in chunks_at_layer(root, 0)] == [ord(ch) for ch in text]
    top = tree_height(root)
    assert chunks_at_layer(root, top) == [root]
    for (layer, phase), chunks in captured.items():
        assert chunks_at_layer(root, layer, phase) == chunks
    with pytest.raises(ValueError):
        chunks_at_layer(root, top + 1)


def test_chunk_layer(rng, cfg, store):
    text = rand_text(rng, 500)
    root = build_tree(text, cfg, store)
    assert chunk_layer(text, cfg, store, 2) == chunks_at_layer(root, 2)


def test_periodic_input_is_small(cfg):
    s = Store()
    root = build_tree("ab" * 5000, cfg, s)
    assert "".join(chr(l.bits) for l in iter_leaves(root)) == "ab" * 5000
    assert len(s) < 200


def test_check_mode_runs(rng):
    cfg = char_config(check=True)
    build_tree(rand_text(rng, 3000), cfg, Store())
    build_tree("\0" * 3000, cfg, Store())
