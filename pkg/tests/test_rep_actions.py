from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sl2_matrices
from lambdatrees.errors import DegenerateAction, DomainError, ParseError, ValidationError
from lambdatrees.field import parse_element
from lambdatrees.hplane import ORIGIN, RepMatrix, mobius_apply
from lambdatrees.lambda_tree import TreePoint, tree_dist
from lambdatrees.rep_actions import (
    IDENTITY_WORD,
    SHIPPED_FAMILIES,
    GroupWord,
    Representation,
    act,
    available_families,
    displacement,
    evaluate_word,
    load_family,
    load_representation,
    min_vector_defect,
    minimal_subtree_sample,
    orbit,
    orbit_sample,
    parse_word,
    trace_length,
    translation_length,
)

GOLDEN = Path(__file__).parent / "golden"
FAMILIES = {name: load_family(name) for name in SHIPPED_FAMILIES}
RANK1 = FAMILIES["rank1_diagonal"]
SCHOTTKY = FAMILIES["schottky_rank2"]
ROTATION = RepMatrix(Fraction(3, 5), Fraction(-4, 5), Fraction(4, 5), Fraction(3, 5))
IDENTITY_REP = Representation(["a"], [RepMatrix.identity()])


def words_of(rep, max_len):
    letters = st.tuples(st.integers(0, rep.rank - 1), st.sampled_from([1, -1]))
    return st.lists(letters, max_size=max_len).map(lambda xs: GroupWord(tuple(xs)))


# -- words --------------------------------------------------------------------


def test_words_reduce_freely():
    w = GroupWord(((0, 1), (1, 1), (1, -1), (0, -1)))
    assert w == IDENTITY_WORD
    assert len(GroupWord(((0, 1), (1, -1)))) == 2


def test_word_inverse_and_power():
    w = GroupWord(((0, 1), (1, -1)))
    assert w * w.inverse() == IDENTITY_WORD
    assert (w**3).inverse() == w ** -3


@pytest.mark.parametrize(
    "text,expected",
    [
        ("a b^-1", ((0, 1), (1, -1))),
        ("a.b⁻¹", ((0, 1), (1, -1))),
        ("a^(-1) b^2", ((0, -1), (1, 1), (1, 1))),
        ("ab", ((0, 1), (1, 1))),
        ("e", ()),
        ("a a^-1", ()),
    ],
)
def test_parse_word(text, expected):
    assert parse_word(text, ["a", "b"]).letters == expected


def test_parse_word_errors():
    with pytest.raises(ParseError):
        parse_word("a c", ["a", "b"])
    with pytest.raises(ParseError):
        parse_word("a ! b", ["a", "b"])


def test_word_format_roundtrip():
    w = GroupWord(((0, 1), (1, -1), (1, -1)))
    text = w.format(["a", "b"])
    assert text == "a.b^-1.b^-1"
    assert parse_word(text, ["a", "b"]) == w


def test_shortlex_enumeration():
    words = SCHOTTKY.words(2)
    assert len(words) == 1 + 4 + 12
    assert words == sorted(words, key=GroupWord.sort_key)


# -- loading ------------------------------------------------------------------


def test_shipped_families_load():
    assert set(SHIPPED_FAMILIES) <= set(available_families())
    for rep in FAMILIES.values():
        for m in rep.matrices:
            assert (m.determinant() - 1).is_zero()


def test_load_inline_text():
    rep = load_representation("[group]\ngenerators = [x]\n[x]\nm11 = t\nm12 = 0\nm21 = 0\nm22 = t^(-1)\n")
    assert rep.names == ["x"]
    assert trace_length(rep, rep.word("x")) == 2


def test_load_rejects_bad_determinant():
    text = "[group]\ngenerators = [x]\n[x]\nm11 = 4*t\nm12 = 0\nm21 = 0\nm22 = 1\n"
    with pytest.raises(ValidationError):
        load_representation(text)
    rep = load_representation(text, normalize="sqrt")
    assert (rep.matrices[0].determinant() - 1).terms(24) == {}
    assert trace_length(rep, rep.word("x")) == 1


def test_load_rejects_negative_determinant_under_normalize():
    text = "[group]\ngenerators = [x]\n[x]\nm11 = -1\nm12 = 0\nm21 = 0\nm22 = 1\n"
    with pytest.raises(ValidationError):
        load_representation(text, normalize="sqrt")


@pytest.mark.parametrize(
    "text",
    [
        "[group]\ngenerators = [x]\n",
        "[group]\ngenerators = [x]\n[x]\nm11 = 1\nm12 = 0\nm21 = 0\n",
        "[x]\nm11 = 1\n",
        "[group]\ngenerators = [x]\ndet_tolerance = 1e-9\n[x]\nm11 = 1\nm12 = 0\nm21 = 0\nm22 = 1\n",
    ],
)
def test_load_structural_errors(text):
    with pytest.raises(ValidationError):
        load_representation(text)


def test_load_malformed_expression():
    with pytest.raises(ParseError):
        load_representation("[group]\ngenerators = [x]\n[x]\nm11 = 1 +* t\nm12 = 0\nm21 = 0\nm22 = 1\n")


# -- words as matrices --------------------------------------------------------


def test_evaluate_word_examples():
    rep = Representation(["u", "l"], [RepMatrix(1, 1, 0, 1), RepMatrix(1, 0, 1, 1)])
    assert evaluate_word(rep, IDENTITY_WORD).equals(RepMatrix.identity())
    w = rep.word("u l")
    assert evaluate_word(rep, w * w.inverse()).equals(RepMatrix.identity())
    assert evaluate_word(rep, w).equals(RepMatrix(2, 1, 1, 1))


@given(words_of(SCHOTTKY, 3))
def test_act_matches_word_matrix(w):
    assert act(SCHOTTKY, w, ORIGIN).same_point(mobius_apply(evaluate_word(SCHOTTKY, w), ORIGIN))


# -- orbits -------------------------------------------------------------------


def test_orbit_radius_zero():
    assert [w for w, _ in orbit(SCHOTTKY, radius=0)] == [IDENTITY_WORD]


def test_rank1_orbit_is_collinear():
    points = orbit(RANK1, radius=2)
    assert len(points) == 5
    base = points[0][1]
    assert sorted(tree_dist(base, p) for _, p in points) == [0, 1, 1, 2, 2]
    assert tree_dist(points[1][1], points[2][1]) == 2


def test_identity_orbit_is_a_point():
    assert len(orbit(IDENTITY_REP, radius=3)) == 1


def test_displacement():
    assert displacement(IDENTITY_REP, ORIGIN) == 0
    assert displacement(RANK1, ORIGIN) == 1
    g = RepMatrix(parse_element("t^(-1)"), 1, 0, parse_element("t"))
    moved = mobius_apply(g, ORIGIN)
    assert displacement(RANK1.conjugate(g), moved) == displacement(RANK1, ORIGIN)


# -- translation lengths ------------------------------------------------------


def test_translation_length_examples():
    assert translation_length(RANK1, RANK1.word("a")) == 1
    assert trace_length(RANK1, RANK1.word("a")) == 1
    rot = Representation(["r"], [ROTATION])
    assert translation_length(rot, rot.word("r")) == 0
    assert trace_length(rot, rot.word("r")) == 0


def test_commutator_lengths_agree():
    w = SCHOTTKY.word("a b a^-1 b^-1")
    assert translation_length(SCHOTTKY, w) == trace_length(SCHOTTKY, w) > 0


@given(st.sampled_from(SHIPPED_FAMILIES).flatmap(lambda n: st.tuples(st.just(FAMILIES[n]), words_of(FAMILIES[n], 4))))
def test_two_length_oracles_agree(case):
    rep, w = case
    assert translation_length(rep, w) == trace_length(rep, w)


@given(st.sampled_from(SHIPPED_FAMILIES[1:]).flatmap(
    lambda n: st.tuples(st.just(FAMILIES[n]), words_of(FAMILIES[n], 3), words_of(FAMILIES[n], 2))
))
def test_length_invariances(case):
    rep, w, u = case
    ell = translation_length(rep, w)
    assert translation_length(rep, w.inverse()) == ell
    assert translation_length(rep, u * w * u.inverse()) == ell


@given(sl2_matrices(max_factors=2))
def test_length_invariant_under_field_conjugation(m):
    w = SCHOTTKY.word("a b^-1")
    assert translation_length(SCHOTTKY.conjugate(m), w) == translation_length(SCHOTTKY, w)


@given(st.sampled_from(SHIPPED_FAMILIES).flatmap(lambda n: st.tuples(st.just(FAMILIES[n]), words_of(FAMILIES[n], 3))))
def test_n_step_distance_law(case):
    rep, w = case
    ell = translation_length(rep, w)
    if ell == 0:
        return
    x = TreePoint(ORIGIN)
    dists = [tree_dist(x, TreePoint(act(rep, w**n, ORIGIN))) for n in range(1, 4)]
    assert dists[1] - dists[0] == ell
    assert dists[2] - dists[1] == ell


# -- subtree samples ----------------------------------------------------------


def test_rank1_subtree_is_a_path():
    assert minimal_subtree_sample(RANK1, 2).is_path


def test_rank1_subtree_golden():
    assert minimal_subtree_sample(RANK1, 2).to_text() == (GOLDEN / "rank1_diagonal_tree.txt").read_text()


def test_schottky_subtree_golden():
    tree = minimal_subtree_sample(SCHOTTKY, 2)
    assert tree.to_text() == (GOLDEN / "schottky_rank2_tree.txt").read_text()
    branch = [v for v in tree.vertices if tree.degree(v) >= 3]
    assert branch and all(v in tree.local_orders for v in branch)


def test_identity_subtree_is_degenerate():
    with pytest.raises(DegenerateAction):
        minimal_subtree_sample(IDENTITY_REP, 2)


def test_orbit_sample_includes_midpoints():
    labels = [p.label for p in orbit_sample(SCHOTTKY, 1)]
    assert "mid(a)" in labels and "mid(b)" in labels


# -- minimal-vector defect ----------------------------------------------------


def test_defect_identity_and_rotations():
    assert min_vector_defect(IDENTITY_REP, Fraction(1, 2)) == 0
    assert min_vector_defect(load_family("rotations"), Fraction(1, 3)) < 1e-10


def test_defect_unipotent_positive():
    assert min_vector_defect(load_family("unipotent"), Fraction(1, 2)) > 1e-3


def test_defect_invariant_under_rotation_conjugation():
    rep = SCHOTTKY
    t0 = Fraction(1, 10)
    base = min_vector_defect(rep, t0)
    for a, b, c in [(3, 4, 5), (5, 12, 13), (8, 15, 17)]:
        rot = RepMatrix(Fraction(a, c), Fraction(-b, c), Fraction(b, c), Fraction(a, c))
        assert abs(min_vector_defect(rep.conjugate(rot), t0) - base) <= 1e-10 * max(1, base)


def test_defect_pole():
    rep = load_representation("[group]\ngenerators = [x]\n[x]\nm11 = 1\nm12 = 1/(1-2*t)\nm21 = 0\nm22 = 1\n")
    with pytest.raises(DomainError):
        min_vector_defect(rep, Fraction(1, 2))
