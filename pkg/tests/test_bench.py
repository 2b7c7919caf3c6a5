import random

import pytest

from chonkers.bench.cli import main, parse_unit
from chonkers.bench.corpus import random_corpus, read_text, write_dedup_corpus, write_random_corpus
from chonkers.bench.experiments import (DedupIndex, boundaries, census, census_table, chunk_records,
                                        dedup_versions, deletion_extents, layer_weights, weight_profile)
from chonkers.chunkcore import Store
from chonkers.pipeline import build_tree, byte_config, char_config


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    lines = text.strip().split("\n")
    return [l.split("\t") for l in lines]


def test_parse_unit():
    assert parse_unit("12KiB") == 98304
    assert parse_unit("257") == 257


def test_chunk_one_byte(tmp_path, capsys):
    f = tmp_path / "one.bin"
    f.write_bytes(b"z")
    code, out, _ = run(capsys, "chunk", f)
    assert code == 0
    r = rows(out)
    assert len(r) == 2 and r[1][1:3] == ["0", "1"]


def test_chunk_deterministic(tmp_path, capsys):
    f = tmp_path / "data.bin"
    f.write_bytes(random.Random(1).randbytes(20_000))
    _, a, _ = run(capsys, "chunk", f, "--target-unit", "2KiB")
    _, b, _ = run(capsys, "chunk", f, "--target-unit", "2KiB")
    assert a == b
    r = rows(a)[1:]
    assert sum(int(x[2]) for x in r) == 20_000


def test_chunk_caterpillar_dominates(tmp_path, capsys):
    f = tmp_path / "rep.bin"
    unit = bytes(random.Random(2).randbytes(100))
    f.write_bytes(unit * (64 * 1024 // 100))
    _, out, _ = run(capsys, "chunk", f, "--target-unit", "12KiB")
    r = rows(out)[1:]
    biggest = max(r, key=lambda x: int(x[2]))
    assert biggest[4].startswith("caterpillar")
    assert int(biggest[2]) > 0.9 * 64 * 1024


def test_chunk_missing_file(capsys, tmp_path):
    code, out, _ = run(capsys, "chunk", tmp_path / "nope")
    assert code == 1 and "error" in out


def test_stats_weight(tmp_path, capsys):
    write_random_corpus(tmp_path / "c", 3, 3000, seed=1)
    code, out, _ = run(capsys, "stats-weight", tmp_path / "c")
    r = rows(out)
    assert code == 0 and r[0][0] == "layer"
    layer1 = r[1]
    assert abs(float(layer1[2]) - 0.87) < 0.03
    for row in r[1:]:
        assert float(row[13]) <= 1.0


def test_stats_weight_single_char(tmp_path, capsys):
    (tmp_path / "c").mkdir()
    (tmp_path / "c" / "a.txt").write_text("a")
    assert layer_weights([build_tree("a", char_config())], 65, 1).average == pytest.approx(32 / 65)
    assert weight_profile("a", char_config()) == []


def test_empty_corpus(tmp_path, capsys):
    (tmp_path / "c").mkdir()
    code, _, err = run(capsys, "stats-weight", tmp_path / "c")
    assert code == 1 and "empty" in err


def test_census_cli(tmp_path, capsys):
    write_random_corpus(tmp_path / "c", 2, 2000, seed=3)
    code, out, _ = run(capsys, "census", tmp_path / "c")
    r = rows(out)
    assert r[1][0] == "All"
    for row in r[1:]:
        assert abs(sum(float(x) for x in row[1:]) - 100) < 0.01


def test_census_single_proto_chunk():
    assert census(build_tree("a", char_config())) == {}
    assert census_table(census(build_tree("a", char_config()))) == []


def test_census_counts_occurrences():
    s = Store()
    root = build_tree("abcdefghij" * 200, char_config(), s)
    counts = census(root)
    # every merge node is counted once per occurrence, so merges = proto-chunks - 1 - caterpillar savings
    assert sum(counts.values()) > 0


def test_locality_cli(tmp_path, capsys):
    write_random_corpus(tmp_path / "c", 1, 2000, seed=4)
    (tmp_path / "c" / "short.txt").write_text("abc")
    code, out, err = run(capsys, "stats-locality", tmp_path / "c")
    assert code == 0 and "skipping" in err
    for row in rows(out)[1:]:
        assert all(float(x) >= 0 for x in row[2:])


def test_deletion_extents():
    old = {3, 7, 12, 20}
    # deleting position 10 shifts later boundaries down by one
    assert deletion_extents(old, {3, 7, 11, 19}, 10) == (0, 0)
    assert deletion_extents(old, {3, 6, 11, 19}, 10) == (4, 0)
    assert deletion_extents(old, {3, 7, 11, 17}, 10) == (0, 10)


def test_unchanged_prefix_has_no_left_extent():
    cfg = char_config()
    s = Store()
    text = "".join(chr(random.Random(5).randrange(256)) for _ in range(3000))
    a = build_tree(text, cfg, s)
    b = build_tree(text[:-1], cfg, s)
    left, right = deletion_extents(boundaries(a, 1, 32), boundaries(b, 1, 32), 2999)
    assert left < 30 and right == 0


def test_dedup_identical_copies(tmp_path, capsys):
    for v in ("v1", "v2"):
        (tmp_path / v).mkdir()
        (tmp_path / v / "f.bin").write_bytes(random.Random(6).randbytes(30_000))
    code, out, _ = run(capsys, "dedup", tmp_path / "v1", tmp_path / "v2", "--target-unit", "2KiB")
    r = rows(out)
    assert code == 0 and float(r[1][2]) == pytest.approx(2.0)


def test_dedup_incremental_matches_scratch(tmp_path):
    v1, v2 = write_dedup_corpus(tmp_path, total_bytes=200_000, files=4, edits=10, seed=7)
    cfg = byte_config(2 * 1024 * 8)
    a = dedup_versions([v1, v2], cfg, incremental=True)
    b = dedup_versions([v1, v2], cfg, incremental=False)
    assert (a.unique_bytes, a.chunks, a.chunk_sizes) == (b.unique_bytes, b.chunks, b.chunk_sizes)
    assert a.ratio >= 1


def test_dedup_caterpillar_stored_once():
    cfg = byte_config(2 * 1024 * 8)
    data = b"0123456789" * 5000
    idx = DedupIndex()
    idx.add_file(data, build_tree(data, cfg), cfg)
    assert idx.report.unique_bytes < 5000


def test_yarn_demo(capsys):
    code, out, _ = run(capsys, "yarn-demo", "--n", "10")
    assert code == 0 and rows(out)[1][2] == "yes"
    code, out, _ = run(capsys, "yarn-demo", "--n", "2")
    assert code == 0 and rows(out)[1][1] == "1"
    code, _, err = run(capsys, "yarn-demo", "--n", "51")
    assert code == 1 and "refused" in err


def test_gen_corpus(tmp_path, capsys):
    code, _, _ = run(capsys, "gen-corpus", "random", tmp_path / "r", "--count", "3", "--length", "50",
                     "--seed", "9")
    assert code == 0
    files = sorted((tmp_path / "r").iterdir())
    assert [read_text(f) for f in files] == random_corpus(3, 50, seed=9)
    assert all(max(map(ord, read_text(f))) < 256 for f in files)


def test_out_flag(tmp_path, capsys):
    out = tmp_path / "o.tsv"
    code, stdout, _ = run(capsys, "yarn-demo", "--n", "5", "--out", out)
    assert code == 0 and stdout == "" and out.read_text().startswith("n\t")


def test_chunk_records_cover_input():
    cfg = byte_config(1024 * 8)
    data = random.Random(8).randbytes(10_000)
    recs = chunk_records(build_tree(data, cfg), cfg)
    assert recs[0][0] == 0
    assert sum(c.weight for _, c in recs) == len(data) * 8
