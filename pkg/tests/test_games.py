import copy
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neatgames.constructions import (Inconclusive, SimpleGraph, build_full_set_structure,
                                     build_rainbow, ca3_frames, one_atom_structure)
from neatgames.games import (EXISTS, FORALL, GameSpec, canonicalize_position, cone_face_strategy,
                             ef_pebble_game, forall_strategy_cert, forced_red_indices, make_model,
                             solve_game, verify_strategy)
from neatgames.networks import Network, apply_node_map, complete_network
from neatgames.rainbow import RainbowSignature

FULL33 = build_full_set_structure(3, 3)
CATALOGUE = ca3_frames()
PEA = build_rainbow(RainbowSignature.pea(3))


@pytest.mark.parametrize("variant", "GF")
@pytest.mark.parametrize("m", [3, 4, 5])
@pytest.mark.parametrize("rounds", [None, 0, 1, 3])
def test_one_atom_frame_is_an_existential_win(variant, m, rounds):
    spec = GameSpec(variant, m, rounds, one_atom_structure())
    o = solve_game(spec)
    assert o.winner == EXISTS
    assert verify_strategy(spec, o.certificate)


def test_bad_game_parameters():
    for kw in [dict(variant="H"), dict(m=2), dict(rounds=-1), dict(overwrite="sometimes"),
               dict(yellows="pale")]:
        args = dict(variant="G", m=3, rounds=None, structure=FULL33) | kw
        with pytest.raises(ValueError):
            GameSpec(**args)


def test_catalogue_forall_certificate_and_tampering():
    s = CATALOGUE[4]
    spec = GameSpec("F", 3, None, s)
    o = solve_game(spec)
    assert o.winner == FORALL
    assert verify_strategy(spec, o.certificate)
    # the same certificate does not transfer to the other variant
    assert not verify_strategy(GameSpec("G", 3, None, s), o.certificate)
    bad = copy.deepcopy(o.certificate)
    del bad.forcing[next(iter(bad.forcing))]
    assert not verify_strategy(spec, bad)


def test_existential_certificate_tampering():
    spec = GameSpec("G", 3, None, CATALOGUE[10])
    o = solve_game(spec)
    assert o.winner == EXISTS and verify_strategy(spec, o.certificate)
    bad = copy.deepcopy(o.certificate)
    bad.initial.pop(next(iter(bad.initial)))
    assert not verify_strategy(spec, bad)
    bad = copy.deepcopy(o.certificate)
    q, r = next((q, r) for q, r in bad.safe if r != 0 and bad.moves.get((q, r)))
    bad.moves[q, r] = []
    assert not verify_strategy(spec, bad)


def test_rounds_certificates_respect_the_bound():
    s = CATALOGUE[4]
    for k in range(4):
        spec = GameSpec("F", 3, k, s)
        o = solve_game(spec)
        assert verify_strategy(spec, o.certificate)
        if o.winner == FORALL:
            assert max(rank for _, rank in o.certificate.forcing.values()) <= k


def test_rounds_zero_is_always_existential():
    for s in CATALOGUE[:8]:
        assert solve_game(GameSpec("F", 3, 0, s)).winner == EXISTS


def test_overwrite_readings_are_ordered():
    # a looser overwrite rule only adds existential responses
    for s in CATALOGUE[:9]:
        for variant, m in itertools.product("GF", (3, 4)):
            wins = [solve_game(GameSpec(variant, m, None, s, overwrite=o)).winner == EXISTS
                    for o in ("never", "when-full", "always")]
            assert wins == sorted(wins)


def test_cone_strategy_on_pea_verifies():
    spec = GameSpec("G", 6, None, PEA)
    model = make_model(spec)
    atom = model.candidate_atoms()[0]
    cert = forall_strategy_cert(spec, atom, cone_face_strategy)
    assert verify_strategy(spec, cert)
    worst = max(cert.forcing, key=lambda q: cert.forcing[q][1])
    bad = copy.deepcopy(cert)
    d, rank = bad.forcing[worst]
    bad.forcing[worst] = (d, 1)
    assert not verify_strategy(spec, bad)


def test_rainbow_solver_never_claims_an_existential_win():
    o = solve_game(GameSpec("G", 4, None, PEA), budget_ms=3000)
    assert isinstance(o, Inconclusive) or o.winner == FORALL


def test_order_restricted_reds_decrease():
    spec = GameSpec("F", 6, None, build_rainbow(RainbowSignature.ordered(-2, 2, 0, 2)),
                    yellows="dominant")
    o = solve_game(spec)
    assert o.winner == FORALL and verify_strategy(spec, o.certificate)
    reds = forced_red_indices(spec, o.certificate)
    assert all(a > b for a, b in zip(reds, reds[1:]))


def test_dominant_yellows_agree_with_exact_on_small_signature():
    s = build_rainbow(RainbowSignature.ordered(-2, 2, 0, 2))
    for variant in "GF":
        exact = solve_game(GameSpec(variant, 5, None, s))
        dominant = solve_game(GameSpec(variant, 5, None, s, yellows="dominant"))
        assert exact.winner == dominant.winner == FORALL


# ---------------------------------------------------------------- canonical positions


def _small_networks():
    out = list(complete_network(FULL33, range(3)))
    for s in CATALOGUE:
        out += list(itertools.islice(complete_network(s, range(3)), 10))
    return out


NETS = _small_networks()


def _isomorphic(a: Network, b: Network) -> bool:
    if a.structure is not b.structure or len(a.nodes) != len(b.nodes):
        return False
    for perm in itertools.permutations(b.nodes):
        theta = dict(zip(a.nodes, perm))
        if all(a.label(x) == b.label(tuple(theta[u] for u in x))
               for x in itertools.product(a.nodes, repeat=a.structure.dim)):
            return True
    return False


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(NETS), st.permutations(range(3)))
def test_canonical_form_ignores_node_names(net, perm):
    p, _ = canonicalize_position(net)
    renamed = apply_node_map(net, dict(enumerate(perm)))
    assert canonicalize_position(renamed)[0] == p


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(NETS))
def test_canonical_relabelling_reproduces_the_table(net):
    p, relabel = canonicalize_position(net)
    back = {new: old for old, new in relabel.items()}
    canon = apply_node_map(net, back)
    assert canon.table == make_model(GameSpec("G", 3, None, net.structure)).table(p)
    assert canonicalize_position(canon)[0] == p


def test_canonical_form_matches_isomorphism():
    by_structure = {}
    for net in NETS:
        by_structure.setdefault(id(net.structure), []).append(net)
    for nets in by_structure.values():
        for a, b in itertools.combinations(nets[:8], 2):
            same = canonicalize_position(a)[0] == canonicalize_position(b)[0]
            assert same == _isomorphic(a, b)


def test_rainbow_canonical_form():
    nets = list(itertools.islice(complete_network(PEA, range(3)), 30))
    rng = random.Random(3)
    for net in nets:
        perm = rng.sample(range(3), 3)
        renamed = apply_node_map(net, dict(enumerate(perm)))
        assert canonicalize_position(renamed)[0] == canonicalize_position(net)[0]


# ---------------------------------------------------------------- pebble game


def test_pebble_game_examples():
    k3, k4 = SimpleGraph.complete(3), SimpleGraph.complete(4)
    assert ef_pebble_game(k4, k3, 4, 5) == FORALL
    assert ef_pebble_game(k4, k3, 3, 20) == EXISTS
    assert ef_pebble_game(k3, k3, 3, 10) == EXISTS
    assert ef_pebble_game(SimpleGraph.cycle(5), SimpleGraph.cycle(5), 2, 6) == EXISTS
    # a triangle needs three pebbles to be told apart from a path-like cycle
    assert ef_pebble_game(k3, SimpleGraph.cycle(6), 2, 10) == EXISTS
    assert ef_pebble_game(k3, SimpleGraph.cycle(6), 3, 3) == FORALL


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 5), st.integers(1, 4), st.integers(0, 4))
def test_pebble_game_monotone(n, pebbles, rounds):
    g1, g2 = SimpleGraph.complete(n), SimpleGraph.cycle(n + 1)
    here = ef_pebble_game(g1, g2, pebbles, rounds) == EXISTS
    assert here >= (ef_pebble_game(g1, g2, pebbles + 1, rounds) == EXISTS)
    assert here >= (ef_pebble_game(g1, g2, pebbles, rounds + 1) == EXISTS)


@pytest.mark.parametrize("g", [SimpleGraph.complete(4), SimpleGraph.cycle(5),
                               SimpleGraph.single_edge()])
def test_pebble_game_on_equal_graphs(g):
    assert ef_pebble_game(g, g, 3, 6) == EXISTS
