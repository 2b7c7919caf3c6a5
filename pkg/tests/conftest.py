import random

import pytest

from chonkers.chunkcore import Store
from chonkers.pipeline import byte_config, char_config


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def cfg():
    return char_config()


@pytest.fixture
def bcfg():
    return byte_config()


@pytest.fixture
def store(cfg):
    return Store(cfg.ring)


def rand_text(rng, n, alphabet=256):
    return "".join(chr(rng.randrange(alphabet)) for _ in range(n))


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict = {}


@pytest.fixture
def report():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
