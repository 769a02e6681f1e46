import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neatgames.algebra import RaAtomStructure, StructureError, validate_ca_frame, validate_ra_frame
from neatgames.constructions import (BlurParams, Inconclusive, SimpleGraph, basic_matrices,
                                     build_blur_structure, build_full_set_structure, build_monk_ra,
                                     build_rainbow, ca3_frames, chromatic_number, index_blur,
                                     materialize, random_ca3_frames, relabel_atoms, split_reds,
                                     theta_embedding)
from neatgames.rainbow import (ColouredGraph, RainbowSignature, count_atoms, enumerate_atom_keys,
                               graph_of_key)

PEA = build_rainbow(RainbowSignature.pea(3))


# ---------------------------------------------------------------- rainbows


def test_pea_palette():
    pal = PEA.palette
    names = [pal.name(c) for c in range(pal.size)]
    assert names == ["g1", "g0^1", "g0^2", "g0^3", "g0^4", "w0", "w1",
                     "r01", "r02", "r10", "r12", "r20", "r21"]
    assert pal.conv[pal.parse_colour("r01")] == pal.parse_colour("r10")
    assert all(pal.conv[c] == c for c in range(pal.size) if not pal.red[c])
    assert pal.shades == 16


def test_pea_atom_count_matches_enumeration():
    assert PEA.count == count_atoms(PEA.palette) == 1490400


def test_single_point_atom():
    key = next(k for k in enumerate_atom_keys(PEA.palette, max_blocks=1))
    g, _ = graph_of_key(PEA.palette, key)
    assert g.size == 1 and PEA.is_atom_key(key)
    for i, j in itertools.combinations(range(3), 2):
        assert PEA.in_diag_key(key, i, j)


def test_small_rainbow_is_a_frame():
    s = build_rainbow(RainbowSignature(tints=(1,), reds=(0, 1)))
    plain = materialize(s)
    assert plain.count == s.count
    assert validate_ca_frame(plain).ok


def test_transpositions_close_the_atom_set():
    keys = list(enumerate_atom_keys(PEA.palette, limit=3000))
    for key in keys:
        for i, j in itertools.combinations(range(3), 2):
            t = PEA.transp_key(i, j, key)
            assert PEA.is_atom_key(t)
            assert PEA.transp_key(i, j, t) == tuple(key)


def test_green_triangle_is_forbidden():
    pal = PEA.palette
    g0 = pal.g0[1]
    g = ColouredGraph(pal, 3, {(0, 1): g0, (0, 2): g0, (1, 2): pal.g[1]})
    assert not g.is_valid()


def test_bad_signatures():
    for kw in [dict(n=2), dict(tints=()), dict(tints=(2, 1)), dict(reds=(1, 1)), dict(copies=0)]:
        with pytest.raises(StructureError):
            RainbowSignature(**kw)


# ---------------------------------------------------------------- splitting and theta


def test_one_copy_split_is_the_same_frame():
    s1 = split_reds(PEA, 1)
    assert s1.sig == PEA.sig and s1.count == PEA.count


def test_split_counts_grow_with_copies():
    counts = [split_reds(PEA, t).count for t in (1, 2, 3)]
    assert counts[0] < counts[1] < counts[2]
    with pytest.raises(StructureError):
        split_reds(split_reds(PEA, 2), 2)


def test_theta_for_one_copy_is_the_identity():
    th, rep = theta_embedding(PEA, split_reds(PEA, 1))
    assert rep.ok and rep.image_total == rep.split_atoms == PEA.count
    key = next(iter(enumerate_atom_keys(PEA.palette, limit=1)))
    assert th(key) == [tuple(key)]


def test_theta_detects_a_missing_copy():
    split = split_reds(PEA, 2)
    key = next(k for k in enumerate_atom_keys(split.palette, max_blocks=3)
               if any(split.palette.red[c] for c in k[:3] if c >= 0))
    _, rep = theta_embedding(PEA, split, drop=[key])
    assert not rep.partition and not rep.ok
    assert any(v.startswith("non-partition") for v in rep.violations)


def test_theta_rejects_unrelated_frames():
    other = build_rainbow(RainbowSignature(tints=(1, 2), reds=(0, 1), copies=2))
    with pytest.raises(StructureError):
        theta_embedding(PEA, other)


# ---------------------------------------------------------------- Monk algebras and matrices


def test_monk_single_edge():
    ra = build_monk_ra(SimpleGraph.single_edge(), 3)
    assert ra.count == 7
    assert list(ra.names) == ["Id", "(u,0)", "(u,1)", "(u,2)", "(v,0)", "(v,1)", "(v,2)"]
    u0, u1, v0 = ra.atom("(u,0)"), ra.atom("(u,1)"), ra.atom("(v,0)")
    # one colour on three copies of a vertex with no edge among them
    assert not ra.consistent(u0, u0, u0)
    assert ra.consistent(u0, u0, v0)
    assert ra.consistent(u0, u1, v0)


def test_monk_independent_vertices_clash():
    g = SimpleGraph(("a", "b"))
    ra = build_monk_ra(g, 2)
    a0, b0 = ra.atom("(a,0)"), ra.atom("(b,0)")
    assert not ra.consistent(a0, b0, a0)


def test_trivial_ra_has_one_matrix():
    ra = RaAtomStructure(["Id"], [0], [0], triples=[(0, 0, 0)])
    for m in (2, 3, 4):
        mat = basic_matrices(ra, m)
        assert mat.count == 1 and mat.cylindric_basis


def test_two_dimensional_matrices_are_the_atoms():
    for g in (SimpleGraph.single_edge(), SimpleGraph.complete(3)):
        ra = build_monk_ra(g, 2)
        assert basic_matrices(ra, 2).count == ra.count


def _non_associative():
    triples = {(0, 0, 0)}
    for a in (1, 2):
        triples |= {(0, a, a), (a, 0, a), (a, a, 0)}
    return RaAtomStructure(["Id", "a", "b"], [0], [0, 1, 2], triples=sorted(triples))


def test_matrices_of_a_broken_ra_are_flagged():
    ra = _non_associative()
    assert not validate_ra_frame(ra).ok
    mat = basic_matrices(ra, 3)
    assert not mat.cylindric_basis
    assert any("commutativity" in v for v in mat.basis_report)


def test_matrix_dimension_must_be_two_or_more():
    with pytest.raises(StructureError):
        basic_matrices(build_monk_ra(SimpleGraph.single_edge(), 2), 1)


def test_matrix_entries_are_consistent():
    ra = build_monk_ra(SimpleGraph.single_edge(), 2)
    mat = basic_matrices(ra, 3)
    for b in mat.matrices:
        for i, j, k in itertools.product(range(3), repeat=3):
            assert ra.consistent(b[i * 3 + j], b[j * 3 + k], b[i * 3 + k])
        for i in range(3):
            assert b[i * 4] in ra.identity


# ---------------------------------------------------------------- blur


@settings(max_examples=200)
@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_index_blur_oracle(i, j, k):
    oracle = any(r - q == q - p for p, q, r in itertools.permutations((i, j, k)))
    assert index_blur(i, j, k) == oracle


def test_blur_structure():
    s = build_blur_structure(BlurParams(2, 6, 3))
    assert s.count == 91
    a = s.atom("a0^0,{0,1}")
    b = s.atom("a0^1,{0,1}")
    # three atoms of one row with one P share W and a progression
    assert not s.consistent(a, a, a)
    assert s.consistent(a, a, b)
    far = s.atom("a0^2,{2,3}")
    # disjoint blurs never clash
    assert s.consistent(a, a, far)


def test_blur_with_every_p():
    s = build_blur_structure(BlurParams(1, 3, 1, all_p=True))
    assert s.count == 1 + 3 * 3
    assert validate_ra_frame(s).ok


def test_blur_parameters_are_checked():
    with pytest.raises(StructureError):
        BlurParams(2, 5, 3)
    with pytest.raises(StructureError):
        BlurParams(1, 3, 0)


# ---------------------------------------------------------------- full set frames


@pytest.mark.parametrize("n,b", [(2, 2), (3, 2), (3, 3), (4, 4)])
def test_full_set_frames(n, b):
    s = build_full_set_structure(n, b)
    assert s.count == b ** n
    assert validate_ca_frame(s).ok


# ---------------------------------------------------------------- chromatic number


@pytest.mark.parametrize("g,want", [
    (SimpleGraph.complete(1), 1),
    (SimpleGraph.complete(3), 3),
    (SimpleGraph.complete(4).disjoint_union(SimpleGraph.complete(4)), 4),
    (SimpleGraph.cycle(5), 3),
    (SimpleGraph.cycle(6), 2),
    (SimpleGraph(()), 0),
])
def test_chromatic_number(g, want):
    assert chromatic_number(g) == want


def test_chromatic_number_out_of_budget():
    r = chromatic_number(SimpleGraph.cycle(7), budget=1)
    assert isinstance(r, Inconclusive) and not r


def test_graph_validation():
    with pytest.raises(StructureError):
        SimpleGraph((0, 1), frozenset({frozenset((0, 2))}))
    with pytest.raises(StructureError):
        SimpleGraph((0,), frozenset({frozenset((0,))}))


# ---------------------------------------------------------------- frame catalogue


def test_catalogue_sizes():
    frames = ca3_frames()
    assert len(frames) == 16
    assert all(1 <= s.count <= 6 for s in frames)
    assert all(s.count <= 4 for s in ca3_frames(4))


def test_random_frames_are_reproducible():
    a, b = random_ca3_frames(12, 99), random_ca3_frames(12, 99)
    assert [s.names for s in a] == [s.names for s in b]
    assert [s.cyl for s in a] == [s.cyl for s in b]
    assert all(validate_ca_frame(s).ok for s in a)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 15), st.randoms(use_true_random=False))
def test_relabelling_atoms_keeps_frames_valid(index, rng):
    s = ca3_frames()[index]
    perm = list(range(s.count))
    rng.shuffle(perm)
    t = relabel_atoms(s, perm)
    assert validate_ca_frame(t).ok
    for i in range(3):
        for a in range(s.count):
            moved = sum(1 << perm[b] for b in range(s.count) if s.cyl[i][a] >> b & 1)
            assert t.cyl[i][perm[a]] == moved
