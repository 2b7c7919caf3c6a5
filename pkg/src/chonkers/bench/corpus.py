"""Corpus generation and loading for the experiments."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Iterator, Optional

RANDOM_LENGTH = 10_000


def random_string(rng: random.Random, length: int = RANDOM_LENGTH, alphabet: int = 256) -> str:
    """Uniform code points in ``[0, alphabet)``."""
    return "".join(map(chr, (rng.randrange(alphabet) for _ in range(length))))


def random_corpus(count: int, length: int = RANDOM_LENGTH, seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    return [random_string(rng, length) for _ in range(count)]


def write_random_corpus(out: Path, count: int, length: int = RANDOM_LENGTH, seed: int = 0) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    width = len(str(max(count - 1, 0)))
    paths = []
    for i, text in enumerate(random_corpus(count, length, seed)):
        p = out / f"random_{i:0{width}d}.txt"
        with open(p, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        paths.append(p)
    return paths


def scattered_edits(data: bytes, edits: int, rng: random.Random) -> bytes:
    """Replace ``edits`` distinct bytes at random positions with different values."""
    buf = bytearray(data)
    for pos in rng.sample(range(len(buf)), edits):
        buf[pos] = (buf[pos] + 1 + rng.randrange(255)) % 256
    return bytes(buf)


def write_dedup_corpus(out: Path, total_bytes: int = 10 * 1024 * 1024, files: int = 40, edits: int = 100,
                       seed: int = 0) -> tuple[Path, Path]:
    """Two versions of a file set; the second differs by single-byte edits.

    Edits are spread over the whole set, not per file.
    """
    out = Path(out)
    rng = random.Random(seed)
    v1, v2 = out / "v1", out / "v2"
    v1.mkdir(parents=True, exist_ok=True)
    v2.mkdir(parents=True, exist_ok=True)
    size = total_bytes // files
    blobs = [rng.randbytes(size) for _ in range(files)]
    joined = scattered_edits(b"".join(blobs), edits, rng)
    width = len(str(files - 1))
    for i, blob in enumerate(blobs):
        name = f"part_{i:0{width}d}.bin"
        (v1 / name).write_bytes(blob)
        (v2 / name).write_bytes(joined[i * size:(i + 1) * size])
    return v1, v2


def iter_files(root: Path) -> Iterator[Path]:
    """Regular files below ``root`` in sorted order (a single file is yielded as is)."""
    root = Path(root)
    if root.is_file():
        yield root
        return
    for p in sorted(root.rglob("*")):
        if p.is_file():
            yield p


def read_text(path: Path) -> str:
    # no newline translation: random corpora contain bare "\r"
    with open(path, encoding="utf-8", newline="") as f:
        return f.read()


def load_texts(root: Path, limit: Optional[int] = None) -> list[tuple[str, str]]:
    out = []
    for p in iter_files(root):
        out.append((str(p.relative_to(root)) if Path(root).is_dir() else p.name, read_text(p)))
        if limit is not None and len(out) >= limit:
            break
    return out
