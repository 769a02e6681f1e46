import itertools
import random

import pytest

from neatgames.algebra import CaAtomStructure
from neatgames.constructions import random_ca3_frames

CORPUS_SEED = 2026

_PATTERNS = [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)]


@pytest.fixture(scope="session")
def corpus():
    return random_ca3_frames(50, CORPUS_SEED)


def near_frame(rng: random.Random, k: int) -> CaAtomStructure:
    """Random three-dimensional structure with honest diagonals but arbitrary cylinder classes.

    Most of these fail the frame axioms, which is the point: they give the
    game and the fixpoint search instances where the universal player wins.
    """
    pats = [rng.choice(_PATTERNS) for _ in range(k)]
    cyl = []
    for i in range(3):
        a, b = [j for j in range(3) if j != i]
        tags = [(p[a] == p[b], rng.randrange(3)) for p in pats]
        cyl.append([sum(1 << y for y in range(k) if tags[y] == tags[x]) for x in range(k)])
    diag = {(i, j): sum(1 << x for x, p in enumerate(pats) if p[i] == p[j])
            for i, j in itertools.combinations(range(3), 2)}
    return CaAtomStructure(3, [f"a{q}" for q in range(k)], cyl, diag)


_results: dict[str, tuple[str, str]] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    num, text = mark.args
    _results[num] = ("PASS" if call.excinfo is None else "FAIL", text)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, text): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        status, text = _results[num]
        terminalreporter.write_line(f"criterion {num}: {status}  {text}")
