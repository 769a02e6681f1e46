import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neatgames.algebra import (CaAtomStructure, EvalError, ModeError, RaAtomStructure, SetOfAtoms,
                               StructureError, TermSyntaxError, check_inequality, eval_term,
                               parse_term, print_term, validate_ca_frame, validate_ra_frame)
from neatgames.constructions import (build_full_set_structure, build_monk_ra, ca3_frames,
                                     one_atom_structure, SimpleGraph)

FULL33 = build_full_set_structure(3, 3)
TAU = "c(1, c(0,x) · s(1,0, c(1,y))) · c(1,x) · c(0,y)"


# ---------------------------------------------------------------- frames


def test_one_atom_frame_is_valid():
    assert validate_ca_frame(one_atom_structure()).ok


def test_full_set_frame_is_valid():
    assert validate_ca_frame(FULL33).ok


def test_non_transitive_cylinder_is_reported():
    rows = list(FULL33.cyl[0])
    a, b = FULL33.atom("(0,0,0)"), FULL33.atom("(1,0,0)")
    rows[a] &= ~(1 << b)
    rows[b] &= ~(1 << a)
    # keep symmetry, break transitivity through (2,0,0)
    bad = CaAtomStructure(3, FULL33.names, [rows] + list(FULL33.cyl[1:]), FULL33.diag, FULL33.transp,
                          FULL33.repl)
    rep = validate_ca_frame(bad)
    assert "c0 idempotence/transitivity" in rep


def test_structural_errors_are_not_axiom_violations():
    with pytest.raises(StructureError):
        CaAtomStructure(3, ["a"], [[1], [1], [3]], {(0, 1): 1, (0, 2): 1, (1, 2): 1})
    with pytest.raises(StructureError):
        CaAtomStructure(3, ["a"], [[1], [1], [1]], {(0, 1): 1, (0, 2): 1})


def test_trivial_relation_algebra():
    ra = RaAtomStructure(["Id"], [0], [0], triples=[(0, 0, 0)])
    assert validate_ra_frame(ra).ok


def test_monk_single_edge_is_valid():
    assert validate_ra_frame(build_monk_ra(SimpleGraph.single_edge(), 3)).ok


def test_injected_cycle_law_violation():
    ra = build_monk_ra(SimpleGraph.single_edge(), 3)
    triples = set(ra.explicit_triples())
    u0, v0, u1 = ra.atom("(u,0)"), ra.atom("(v,0)"), ra.atom("(u,1)")
    # drop one rotation of a consistent triple
    triples.discard((u0, u1, v0))
    assert not validate_ra_frame(ra.with_triples(triples)).ok


@pytest.mark.parametrize("s", ca3_frames(), ids=lambda s: f"{s.count}atoms")
def test_catalogue_frames_validate(s):
    assert validate_ca_frame(s).ok


# ---------------------------------------------------------------- terms


def test_parse_tau_and_diagonal():
    t = parse_term(TAU)
    assert parse_term(print_term(t)) == t
    assert print_term(parse_term("d(0,1)")) == "d(0,1)"


def test_syntax_error_position():
    with pytest.raises(TermSyntaxError) as e:
        parse_term("c(0 x")
    assert e.value.offset == 4


_names = st.sampled_from(["x", "y", "z"])
_idx = st.integers(0, 3)


def _terms():
    base = st.one_of(st.sampled_from(["0", "1"]), _names,
                     st.builds(lambda i, j: f"d({i},{j})", _idx, _idx))

    def grow(inner):
        return st.one_of(
            st.builds(lambda t: f"-({t})", inner),
            st.builds(lambda i, t: f"c({i}, {t})", _idx, inner),
            st.builds(lambda i, j, t: f"s({i},{j}, {t})", _idx, _idx, inner),
            st.builds(lambda i, j, t: f"sT({i},{j}, {t})", _idx, _idx, inner),
            st.builds(lambda a, b: f"({a}) · ({b})", inner, inner),
            st.builds(lambda a, b: f"({a}) + ({b})", inner, inner),
        )

    return st.recursive(base, grow, max_leaves=8)


@given(_terms())
def test_parse_print_round_trip(src):
    t = parse_term(src)
    text = print_term(t)
    assert parse_term(text) == t
    assert print_term(parse_term(text)) == text


def test_eval_diagonal_and_normality():
    assert len(eval_term("d(0,1)", {}, FULL33)) == 9
    assert not eval_term("c(0, x)", {"x": []}, FULL33)


def test_eval_tau_constant_zero_map():
    env = {"x": [FULL33.atom("(0,1,0)")], "y": [FULL33.atom("(1,0,0)")]}
    assert [FULL33.names[a] for a in eval_term(TAU, env, FULL33)] == ["(0,0,0)"]


def test_eval_errors():
    with pytest.raises(EvalError):
        eval_term("c(3, x)", {"x": []}, FULL33)
    with pytest.raises(EvalError):
        eval_term("x", {}, FULL33)


def test_check_inequality_examples():
    assert check_inequality(FULL33, TAU, TAU).holds
    v = check_inequality(FULL33, "c(0,x)", "x")
    assert not v.holds
    assert v.counterexample["x"].ids() == [FULL33.atom("(0,0,0)")]
    with pytest.raises(ModeError):
        check_inequality(FULL33, "-x", "x")


def test_exhaustive_and_sampled_modes_agree_on_small_frame():
    s = ca3_frames()[4]
    for lhs, rhs in [("c(0, x · y)", "c(0,x) · c(0,y)"), ("c(0,x) · c(0,y)", "c(0, x · y)")]:
        ex = check_inequality(s, lhs, rhs, "exhaustive").holds
        assert check_inequality(s, lhs, rhs, ("sampled", 1, 500)).holds >= ex


# ---------------------------------------------------------------- invariants


@settings(max_examples=60)
@given(st.integers(0, (1 << 27) - 1), st.integers(0, 2), st.integers(0, 2))
def test_complete_additivity(bits, i, j):
    s = FULL33
    x = SetOfAtoms(bits, s.count)
    for op in (lambda m: s.c(i, m), lambda m: s.s_repl(i, j, m), lambda m: s.s_transp(i, j, m)
               if i != j else m):
        whole = op(x.bits)
        parts = 0
        for a in x:
            parts |= op(1 << a)
        assert whole == parts


@pytest.mark.parametrize("s", [FULL33] + ca3_frames()[10:13], ids=["full33", "f10", "f11", "f12"])
def test_cylindrifier_laws_on_atoms(s):
    for a in range(s.count):
        for i in range(s.dim):
            assert s.c(i, 1 << a) >> a & 1
            assert s.c(i, s.c(i, 1 << a)) == s.c(i, 1 << a)
            for j in range(s.dim):
                assert s.c(i, s.c(j, 1 << a)) == s.c(j, s.c(i, 1 << a))


def test_replacement_matches_its_definition():
    for i, j in itertools.permutations(range(3), 2):
        for a in range(FULL33.count):
            defined = eval_term(f"c({j}, d({i},{j}) · x)", {"x": [a]}, FULL33)
            assert eval_term(f"s({i},{j}, x)", {"x": [a]}, FULL33) == defined
