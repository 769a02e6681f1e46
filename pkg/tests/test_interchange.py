import copy
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neatgames.algebra import RaAtomStructure
from neatgames.constructions import (BlurParams, SimpleGraph, build_blur_structure,
                                     build_full_set_structure, build_monk_ra, build_rainbow,
                                     ca3_frames, random_ca3_frames)
from neatgames.games import GameSpec, solve_game, verify_strategy
from neatgames.interchange import (DocumentError, dumps, loads, network_from_doc, network_to_doc,
                                   strategy_from_doc, strategy_to_doc, structure_from_doc,
                                   structure_hash, structure_to_doc)
from neatgames.networks import complete_network
from neatgames.rainbow import RainbowSignature

FULL33 = build_full_set_structure(3, 3)


def _round_trip(s):
    text = dumps(structure_to_doc(s))
    back = structure_from_doc(loads(text))
    assert dumps(structure_to_doc(back)) == text
    return back


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_frames_round_trip(seed):
    s = random_ca3_frames(1, seed)[0]
    back = _round_trip(s)
    assert back.cyl == s.cyl and back.diag == s.diag and back.names == s.names


def test_rule_structures_round_trip():
    structures = [build_monk_ra(SimpleGraph.single_edge(), 3),
                  build_blur_structure(BlurParams(1, 3, 2)),
                  build_rainbow(RainbowSignature.ordered(-2, 2, 0, 2)),
                  FULL33]
    for s in structures:
        back = _round_trip(s)
        assert structure_hash(back) == structure_hash(s)


def test_rule_documents_stay_small():
    doc = structure_to_doc(build_blur_structure(BlurParams(2, 6, 3)))
    assert doc["triples"] == {"rule": "blur", "params": {"l": 2, "i_size": 6, "rows": 3,
                                                         "all_p": False}}


def test_explicit_triples_round_trip():
    ra = RaAtomStructure(["Id", "a"], [0], [0, 1],
                         triples=[(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1)])
    back = _round_trip(ra)
    assert all(back.consistent(*t) == ra.consistent(*t) for t in itertools.product(range(2), repeat=3))


def test_rule_output_must_match_listed_atoms():
    doc = structure_to_doc(build_monk_ra(SimpleGraph.single_edge(), 2))
    doc["triples"]["params"]["colours"] = 3
    with pytest.raises(DocumentError, match="triples.rule"):
        structure_from_doc(doc)


@pytest.mark.parametrize("text,where", [
    ("[]", "top level"),
    ("{", "not JSON"),
    ('{"kind": "tree", "version": 1}', "kind"),
    ('{"kind": "network", "version": 7}', "version"),
])
def test_malformed_documents(text, where):
    with pytest.raises(DocumentError, match=where):
        loads(text)


def test_missing_field_is_named():
    doc = structure_to_doc(FULL33)
    del doc["diag"]
    with pytest.raises(DocumentError, match="diag"):
        structure_from_doc(doc)


def test_network_round_trip_and_binding():
    net = next(iter(complete_network(FULL33, range(3))))
    doc = loads(dumps(network_to_doc(net)))
    assert network_from_doc(doc, FULL33) == net
    with pytest.raises(DocumentError, match="structure-hash"):
        network_from_doc(doc, build_full_set_structure(3, 2))


@pytest.mark.parametrize("variant", "GF")
def test_strategy_round_trip(variant):
    s = ca3_frames()[10]
    spec = GameSpec(variant, 3, None, s)
    cert = solve_game(spec).certificate
    text = dumps(strategy_to_doc(cert, s))
    back = strategy_from_doc(loads(text), s)
    assert verify_strategy(spec, back)
    assert dumps(strategy_to_doc(back, s)) == text


def test_tampered_strategy_document():
    s = ca3_frames()[4]
    spec = GameSpec("F", 3, None, s)
    doc = strategy_to_doc(solve_game(spec).certificate, s)
    bad = copy.deepcopy(doc)
    bad["forcing"] = bad["forcing"][1:]
    assert not verify_strategy(spec, strategy_from_doc(bad, s))
    bad = copy.deepcopy(doc)
    del bad["positions"]
    with pytest.raises(DocumentError, match="positions"):
        strategy_from_doc(bad, s)
    with pytest.raises(DocumentError, match="structure-hash"):
        strategy_from_doc(doc, ca3_frames()[5])
