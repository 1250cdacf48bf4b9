from fractions import Fraction

import pytest
from hypothesis import given

from conftest import disk_points, sl2_matrices
from lambdatrees.errors import DomainError, ValidationError
from lambdatrees.field import ONE, T, PuiseuxElement, parse_element
from lambdatrees.hplane import (
    ORIGIN,
    DiskPoint,
    RepMatrix,
    mobius_apply,
    point_on_segment,
    pseudo_dist,
    translate_to_origin,
)

ROTATION = RepMatrix(Fraction(3, 5), Fraction(-4, 5), Fraction(4, 5), Fraction(3, 5))
DIAG = RepMatrix(parse_element("t^(-1/2)"), 0, 0, parse_element("t^(1/2)"))
NEAR_EDGE = DiskPoint(1 - T, 0)


def same_point(z, w):
    return z.same_point(w)


# -- construction -------------------------------------------------------------


def test_disk_membership_checked():
    with pytest.raises(ValidationError):
        DiskPoint(1, 0)
    with pytest.raises(ValidationError):
        DiskPoint(1 + T, 0)
    DiskPoint(1 - T, 0)


def test_determinant_checked():
    with pytest.raises(ValidationError):
        RepMatrix(2, 0, 0, 1)


def test_psl2_equality_up_to_sign():
    assert ROTATION.equals(RepMatrix(*(-e for e in ROTATION.entries())))
    assert not ROTATION.equals(ROTATION.inverse())


# -- Möbius action ------------------------------------------------------------


def test_identity_action():
    z = DiskPoint(Fraction(1, 3), Fraction(-1, 4))
    assert same_point(mobius_apply(RepMatrix.identity(), z), z)


def test_rotation_fixes_origin():
    assert same_point(mobius_apply(ROTATION, ORIGIN), ORIGIN)


def test_diagonal_image_of_origin():
    # Cayley image of w = i/t is (1/t - 1)/(1/t + 1) = (1 - t)/(1 + t), a real number
    image = mobius_apply(DIAG, ORIGIN)
    assert (image.x - (1 - T) / (1 + T)).terms(24) == {}
    assert image.Y.is_exact_zero()


def test_action_is_a_homomorphism():
    z = DiskPoint(Fraction(1, 2), 0)
    lhs = mobius_apply(DIAG @ ROTATION, z)
    rhs = mobius_apply(DIAG, mobius_apply(ROTATION, z))
    assert same_point(lhs, rhs)


@given(sl2_matrices(), disk_points())
def test_action_stays_in_disk(m, z):
    w = mobius_apply(m, z)
    assert (w.S * w.S - w.X * w.X - w.Y * w.Y).sign() > 0


# -- pseudo-distance ----------------------------------------------------------


def test_pseudo_dist_examples():
    z = DiskPoint(Fraction(1, 3), Fraction(1, 5))
    assert pseudo_dist(z, z) == 0
    # ratio 1/(t(2 - t)) has valuation -1
    assert pseudo_dist(ORIGIN, NEAR_EDGE) == 1
    # ratio 4/3
    assert pseudo_dist(ORIGIN, DiskPoint(Fraction(1, 2), 0)) == 0


def test_pseudo_dist_of_opposite_points():
    assert pseudo_dist(NEAR_EDGE, DiskPoint(T - 1, 0)) == 2


@given(disk_points(), disk_points())
def test_pseudo_dist_symmetric_nonnegative(z, w):
    d = pseudo_dist(z, w)
    assert d == pseudo_dist(w, z)
    assert d >= 0


@given(sl2_matrices(), disk_points(), disk_points())
def test_pseudo_dist_invariant(m, z, w):
    assert pseudo_dist(mobius_apply(m, z), mobius_apply(m, w)) == pseudo_dist(z, w)


@given(disk_points(), disk_points(), disk_points())
def test_zero_distance_is_an_equivalence(x, y, z):
    assert pseudo_dist(x, x) == 0
    if pseudo_dist(x, y) == 0 and pseudo_dist(y, z) == 0:
        assert pseudo_dist(x, z) == 0


# -- translations -------------------------------------------------------------


def test_translate_origin_is_identity():
    z = DiskPoint(Fraction(1, 3), Fraction(-1, 7))
    assert same_point(translate_to_origin(ORIGIN)(z), z)


def test_translate_sends_point_to_origin():
    p = DiskPoint(Fraction(1, 3), 0)
    assert same_point(translate_to_origin(p)(p), ORIGIN)


@given(disk_points(), disk_points(), disk_points())
def test_translation_preserves_pseudo_dist(p, x, y):
    tp = translate_to_origin(p)
    assert same_point(tp(p), ORIGIN)
    assert pseudo_dist(tp(x), tp(y)) == pseudo_dist(x, y)


def test_translation_inverse():
    p = DiskPoint(Fraction(1, 3), Fraction(1, 4))
    z = DiskPoint(1 - T, T)
    tp = translate_to_origin(p)
    assert same_point(tp.inverse()(tp(z)), z)


# -- segments -----------------------------------------------------------------


def test_segment_start():
    m = point_on_segment(ORIGIN, NEAR_EDGE, 0)
    assert pseudo_dist(m, ORIGIN) == 0


def test_segment_half():
    m = point_on_segment(ORIGIN, NEAR_EDGE, Fraction(1, 2))
    assert pseudo_dist(ORIGIN, m) == Fraction(1, 2)
    assert pseudo_dist(m, NEAR_EDGE) == Fraction(1, 2)
    # the point is (1 - t^(1/2)) (1 - t) on the positive real axis
    expected = (1 - parse_element("t^(1/2)")) * (1 - T)
    assert (m.x - expected).terms(24) == {}
    assert m.Y.is_exact_zero()


def test_segment_third_additivity():
    m = point_on_segment(ORIGIN, NEAR_EDGE, Fraction(1, 3))
    assert pseudo_dist(ORIGIN, m) == Fraction(1, 3)
    assert pseudo_dist(ORIGIN, m) + pseudo_dist(m, NEAR_EDGE) == 1


def test_segment_out_of_range():
    with pytest.raises(DomainError):
        point_on_segment(ORIGIN, NEAR_EDGE, 2)
    with pytest.raises(DomainError):
        point_on_segment(ORIGIN, NEAR_EDGE, -1)


@given(disk_points(), disk_points())
def test_segment_contracts(x, y):
    d = pseudo_dist(x, y)
    for s in (Fraction(0), d / 3, d / 2, d):
        m = point_on_segment(x, y, s)
        assert pseudo_dist(x, m) == s
        assert pseudo_dist(m, y) == d - s


def test_substitution_doubles_distance():
    y = DiskPoint(1 - T, T / 2)
    assert pseudo_dist(ORIGIN.substitute(2), y.substitute(2)) == 2 * pseudo_dist(ORIGIN, y)


def test_lazy_coordinates():
    z = DiskPoint(ONE / (2 + T), 0)
    assert pseudo_dist(ORIGIN, z) == 0
    assert isinstance(z.x, PuiseuxElement)
