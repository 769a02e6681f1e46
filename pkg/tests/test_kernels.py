import itertools
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neatgames import _kernels_py as py
from neatgames import networks
from neatgames.constructions import (_scan_tables, build_full_set_structure, build_rainbow, ca3_frames,
                                     split_reds, strip_colour)
from neatgames.rainbow import RainbowSignature

try:
    from neatgames import _core
except ImportError:
    _core = None

compiled = pytest.mark.skipif(_core is None, reason="compiled core not built")


@st.composite
def _tables(draw):
    k = draw(st.integers(1, 4))
    arity = draw(st.integers(2, 3))
    colours = draw(st.integers(1, 4))
    table = draw(st.lists(st.integers(0, colours - 1), min_size=k ** arity, max_size=k ** arity))
    return table, k, arity


@settings(max_examples=150, deadline=None)
@given(_tables())
def test_pure_canonical_form_is_a_relabelling(args):
    table, k, arity = args
    key, order = py.canon_table(table, k, arity)
    assert sorted(order) == list(range(k))
    back = py.table_from_shell(key, k, arity)
    for x in itertools.product(range(k), repeat=arity):
        r = sum(v * k ** (arity - 1 - q) for q, v in enumerate(x))
        src = sum(order[v] * k ** (arity - 1 - q) for q, v in enumerate(x))
        assert back[r] == table[src]


@settings(max_examples=100, deadline=None)
@given(_tables(), st.randoms(use_true_random=False))
def test_pure_canonical_form_is_invariant(args, rng):
    table, k, arity = args
    perm = list(range(k))
    rng.shuffle(perm)
    moved = [None] * len(table)
    for x in itertools.product(range(k), repeat=arity):
        r = sum(v * k ** (arity - 1 - q) for q, v in enumerate(x))
        y = sum(perm[v] * k ** (arity - 1 - q) for q, v in enumerate(x))
        moved[y] = table[r]
    assert py.canon_table(moved, k, arity)[0] == py.canon_table(table, k, arity)[0]


@compiled
@settings(max_examples=150, deadline=None)
@given(_tables())
def test_compiled_canonical_form_matches_pure(args):
    table, k, arity = args
    assert _core.canon_table(table, k, arity)[0] == py.canon_table(table, k, arity)[0]


@compiled
@pytest.mark.parametrize("sig,copies", [
    (RainbowSignature(tints=(1, 2), reds=(0, 1)), 2),
    (RainbowSignature(tints=(1,), reds=(0, 1, 2)), 3),
    (RainbowSignature.ordered(-1, 1, 0, 2), 2),
])
def test_compiled_theta_scan_matches_pure(sig, copies):
    s = build_rainbow(sig)
    b = split_reds(s, copies)
    strip = [strip_colour(b.palette, s.palette, c) for c in range(b.palette.size)]
    args = (_scan_tables(s.palette), _scan_tables(b.palette), strip, copies)
    assert _core.theta_scan(*args) == py.theta_scan(*args)


@compiled
@pytest.mark.parametrize("s", [build_full_set_structure(3, 2), build_full_set_structure(3, 3)]
                         + ca3_frames()[8:12], ids=lambda s: f"{s.count}atoms")
def test_compiled_completion_matches_recursion(s, monkeypatch):
    for k in (1, 2, 3):
        table = [None] * k ** 3
        fast = sorted(networks.extend_tables(s, k, table))
        monkeypatch.setattr(networks, "Completer", None)
        slow = sorted(networks.extend_tables(s, k, table))
        monkeypatch.undo()
        assert fast == slow


def test_pure_backend_can_be_forced():
    env = dict(os.environ, NEATGAMES_PURE="1")
    code = "from neatgames import _kernels; print(_kernels.BACKEND, _kernels.Completer)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["python", "None"]


def test_pure_backend_builds_the_same_networks():
    env = dict(os.environ, NEATGAMES_PURE="1")
    code = ("from neatgames.constructions import build_full_set_structure as f\n"
            "from neatgames.networks import complete_network as c\n"
            "print(sorted(n.table for n in c(f(3, 3), range(3))))")
    pure = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          check=True).stdout
    here = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                          check=True).stdout
    assert pure == here


def test_bit_helpers():
    assert py.popcount(0b101101) == 4
    assert list(py.iter_bits(0b101101)) == [0, 2, 3, 5]
    assert list(py.iter_bits(0)) == []
