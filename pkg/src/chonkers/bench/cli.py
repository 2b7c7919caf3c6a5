"""Command line front end: chunk listings and the experiment tables as TSV."""

from __future__ import annotations

import argparse
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from ..chunkcore import Store
from ..errors import ChonkersError, InvariantError
from ..pipeline import BYTE8, CHAR32, ChunkerConfig, build_tree, char_config, default_schedule
from ..yarn import ReverseStats, fibonacci_word, yarn_reverse, yarn_slice
from .corpus import iter_files, load_texts, write_dedup_corpus, write_random_corpus
from .experiments import (BUCKET_LABELS, aggregate_locality, aggregate_weights, census, census_table,
                          chunk_records, dedup_versions, locality_samples, weight_profile)

MAX_FIBONACCI = 50
MIN_LOCALITY_LENGTH = 16


class InputError(Exception):
    """Bad arguments or unreadable input (exit code 1)."""


def parse_unit(text: str) -> int:
    """``"12KiB"`` -> bits; a bare integer is taken as bits."""
    m = re.fullmatch(r"\s*(\d+)\s*(kib|k)?\s*", text, re.IGNORECASE)
    if not m:
        raise argparse.ArgumentTypeError(f"bad unit {text!r} (bits, or KiB like 12KiB)")
    n = int(m.group(1))
    return n * 1024 * 8 if m.group(2) else n


def make_config(args) -> ChunkerConfig:
    gran = args.granularity
    if gran is None:
        gran = BYTE8 if args.command in ("chunk", "dedup") else CHAR32
    target = args.target_unit
    if target is None and args.command == "dedup":
        target = 12 * 1024 * 8
    try:
        return ChunkerConfig(gran, default_schedule(gran, target, args.hash_start_layer))
    except ValueError as e:
        raise InputError(str(e)) from e


def fmt(x: Optional[float], digits: int = 4) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def write_tsv(out, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    out.write("\t".join(header) + "\n")
    for row in rows:
        out.write("\t".join(str(x) for x in row) + "\n")


def parallel_map(fn: Callable, items: list, jobs: int) -> list:
    """Order-preserving map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _texts(args) -> list[tuple[str, str]]:
    root = Path(args.corpus)
    if not root.exists():
        raise InputError(f"{root}: no such file or directory")
    try:
        texts = [(n, t) for n, t in load_texts(root, args.limit) if t]
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(str(e)) from e
    if not texts:
        raise InputError(f"{root}: empty corpus")
    return texts


# subcommands


def _byte_spans(data, root, config: ChunkerConfig, layer: Optional[int]):
    """Chunk records with offsets and lengths in bytes of the file (UTF-8 for char32)."""
    w = config.proto_width
    byte_pos = 0
    for off, c in chunk_records(root, config, layer):
        if config.granularity == BYTE8:
            length = c.weight // w
        else:
            start = off // w
            length = len(data[start:start + c.weight // w].encode("utf-8"))
        yield byte_pos, length, c
        byte_pos += length


def cmd_chunk(args, out) -> int:
    config = make_config(args)
    status = 0
    write_tsv(out, ("file", "offset", "length", "weight", "kind", "hash"), [])
    for name in args.paths:
        paths = list(iter_files(Path(name))) if Path(name).exists() else [Path(name)]
        for path in paths:
            try:
                data = path.read_bytes()
                if config.granularity == CHAR32:
                    data = data.decode("utf-8")
            except (OSError, UnicodeDecodeError) as e:
                out.write(f"{path}\terror\t{type(e).__name__}: {e}\n")
                status = 1
                continue
            if not data:
                continue
            root = build_tree(data, config, Store(config.ring))
            for off, length, c in _byte_spans(data, root, config, args.layer):
                kind = f"caterpillar*{c.count}" if c.is_caterpillar else "plain"
                out.write(f"{path}\t{off}\t{length}\t{c.weight}\t{kind}\t{c.content.hash:08x}\n")
    return status


def _profile(job):
    text, config = job
    return weight_profile(text, config)


def cmd_stats_weight(args, out) -> int:
    config = make_config(args)
    texts = _texts(args)
    profiles = parallel_map(_profile, [(t, config) for _, t in texts], args.jobs)
    header = ("layer", "count",
              "avg_mean", "avg_sd", "avg_min", "avg_max",
              "sigma_mean", "sigma_sd", "sigma_min", "sigma_max",
              "maxseg_mean", "maxseg_sd", "maxseg_min", "maxseg_max",
              "minpair_mean", "minpair_sd", "minpair_min", "minpair_max")

    def cells(s):
        return ("", "", "", "") if s is None else (fmt(s.mean), fmt(s.sd), fmt(s.lo), fmt(s.hi))

    rows = [(r.layer, r.count, *cells(r.average), *cells(r.sigma), *cells(r.max_segment), *cells(r.min_pair))
            for r in aggregate_weights(profiles)]
    write_tsv(out, header, rows)
    return 0


def _locality(job):
    text, config = job
    return locality_samples(text, config)


def cmd_stats_locality(args, out) -> int:
    config = make_config(args)
    texts = []
    for name, t in _texts(args):
        if len(t) < MIN_LOCALITY_LENGTH:
            print(f"skipping {name}: shorter than {MIN_LOCALITY_LENGTH} characters", file=sys.stderr)
        else:
            texts.append(t)
    if not texts:
        raise InputError("no string long enough for the locality experiment")
    per_text = parallel_map(_locality, [(t, config) for t in texts], args.jobs)
    rows = aggregate_locality(s for samples in per_text for s in samples)
    write_tsv(out, ("layer", "count", "left_mean", "left_sd", "left_max", "right_mean", "right_sd", "right_max"),
              [(r.layer, r.count, fmt(r.left_mean), fmt(r.left_sd), fmt(r.left_max),
                fmt(r.right_mean), fmt(r.right_sd), fmt(r.right_max)) for r in rows])
    return 0


def _census(job):
    text, config = job
    return census(build_tree(text, config, Store(config.ring)))


def cmd_census(args, out) -> int:
    config = make_config(args)
    texts = _texts(args)
    total = None
    # sum in corpus order so the result does not depend on scheduling
    for counts in parallel_map(_census, [(t, config) for _, t in texts], args.jobs):
        total = counts if total is None else total + counts
    rows = census_table(total)
    write_tsv(out, ("layer",) + BUCKET_LABELS, [(r.layer, *(fmt(p) for p in r.percent)) for r in rows])
    return 0


def cmd_dedup(args, out) -> int:
    config = make_config(args)
    dirs = [Path(d) for d in args.versions]
    for d in dirs:
        if not d.is_dir():
            raise InputError(f"{d}: not a directory")
    r = dedup_versions(dirs, config, incremental=not args.from_scratch)
    write_tsv(out, ("total_bytes", "unique_bytes", "ratio", "chunks", "avg_chunk", "sd_chunk"),
              [(r.total_bytes, r.unique_bytes, fmt(r.ratio), r.chunks, fmt(r.avg_chunk), fmt(r.sd_chunk))])
    return 0


def cmd_yarn_demo(args, out) -> int:
    n = args.n
    if n > MAX_FIBONACCI:
        raise InputError(f"n = {n} refused: Fibonacci words beyond n = {MAX_FIBONACCI} are too long")
    if n < 1:
        raise InputError("n must be at least 1")
    config = char_config()
    store = Store(config.ring)
    t0 = time.perf_counter()
    w = fibonacci_word(n, config, store)
    t1 = time.perf_counter()
    length = len(w)
    if length >= 3:
        cut = yarn_slice(w, 0, length - 2)
        stats = ReverseStats()
        rev = yarn_reverse(cut, stats)
        ok = rev.root is cut.root
    else:
        # words of length < 3 truncate to at most one character
        stats = ReverseStats()
        ok = True
    t2 = time.perf_counter()
    write_tsv(out, ("n", "length", "palindrome", "build_seconds", "check_seconds", "nodes", "reverse_computed",
                    "reverse_hits"),
              [(n, length, "yes" if ok else "no", fmt(t1 - t0), fmt(t2 - t1), len(store), stats.computed,
                stats.hits)])
    return 0 if ok else 2


def cmd_gen_corpus(args, out) -> int:
    target = Path(args.out_dir)
    if args.kind == "random":
        paths = write_random_corpus(target, args.count, args.length, args.seed)
        out.write(f"wrote {len(paths)} files to {target}\n")
    else:
        v1, v2 = write_dedup_corpus(target, args.size, args.files, args.edits, args.seed)
        out.write(f"wrote {v1} and {v2}\n")
    return 0


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--granularity", choices=(BYTE8, CHAR32), default=None,
                        help="proto-chunk kind (default: byte8 for chunk/dedup, char32 otherwise)")
    common.add_argument("--target-unit", type=parse_unit, default=None,
                        help="absolute unit of the last layer, in bits or KiB (e.g. 12KiB)")
    common.add_argument("--hash-start-layer", type=int, default=3)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--jobs", type=int, default=1)

    p = argparse.ArgumentParser(prog="chonkers", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("chunk", parents=[common], help="list final-layer chunks of files")
    s.add_argument("paths", nargs="+")
    s.add_argument("--layer", type=int, default=None, help="layer to list (default: last scheduled layer)")
    s.set_defaults(func=cmd_chunk)

    for name, func, help_ in (("stats-weight", cmd_stats_weight, "per-layer weight statistics"),
                              ("stats-locality", cmd_stats_locality, "edit locality per layer"),
                              ("census", cmd_census, "merge nodes per phase and priority")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("corpus")
        s.add_argument("--limit", type=int, default=None, help="use only the first N files")
        s.set_defaults(func=func)

    s = sub.add_parser("dedup", parents=[common], help="dedup report over version directories")
    s.add_argument("versions", nargs="+")
    s.add_argument("--from-scratch", action="store_true", help="rebuild every file instead of splicing edits")
    s.set_defaults(func=cmd_dedup)

    s = sub.add_parser("yarn-demo", parents=[common], help="Fibonacci word palindrome check")
    s.add_argument("--n", type=int, default=30)
    s.set_defaults(func=cmd_yarn_demo)

    s = sub.add_parser("gen-corpus", parents=[common], help="write a seeded synthetic corpus")
    s.add_argument("kind", choices=("random", "dedup"))
    s.add_argument("out_dir")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--length", type=int, default=10_000)
    s.add_argument("--size", type=int, default=10 * 1024 * 1024)
    s.add_argument("--files", type=int, default=40)
    s.add_argument("--edits", type=int, default=100)
    s.set_defaults(func=cmd_gen_corpus)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        return args.func(args, out)
    except InvariantError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2
    except (InputError, ChonkersError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
