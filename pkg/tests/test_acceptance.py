"""Acceptance criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the "acceptance criteria" section of the terminal summary.
"""

import itertools
import random
import time
from fractions import Fraction

import mpmath
import pytest

from lambdatrees.degeneration import (
    DELTA0,
    RealConfig,
    convergence_check,
    limit_table,
    orientation_compare,
    oriented_approximation_check,
)
from lambdatrees.field import Coefficient, to_mpf
from lambdatrees.hplane import ORIGIN, RepMatrix
from lambdatrees.lambda_tree import (
    ResidueDirection,
    TreePoint,
    check_four_point,
    cyclic_order,
    germ_direction,
    germ_equal,
    tree_dist,
    tripod_orientation,
)
from lambdatrees.rep_actions import (
    SHIPPED_FAMILIES,
    GroupWord,
    act,
    load_family,
    min_vector_defect,
    orbit_sample,
    pairs_upto,
    trace_length,
    translation_length,
)

FAMILIES = {name: load_family(name) for name in SHIPPED_FAMILIES}
SAMPLES = {name: orbit_sample(rep, 2) for name, rep in FAMILIES.items()}


def random_word(rng, rep, max_len):
    letters = []
    for _ in range(rng.randint(1, max_len)):
        letters.append((rng.randrange(rep.rank), rng.choice((1, -1))))
    return GroupWord(tuple(letters))


# -- 1. four-point law --------------------------------------------------------


def test_criterion_1_four_point_law(criterion):
    details, ok = [], True
    for name in SHIPPED_FAMILIES:
        start = time.perf_counter()
        report = check_four_point(orbit_sample(FAMILIES[name], 2))
        elapsed = time.perf_counter() - start
        ok &= report.passed and elapsed < 30
        details.append(f"{name}: {len(report.violations)} violations in {elapsed:.1f}s")
    assert criterion("criterion 1 (four-point law)", ok, "; ".join(details))


# -- 2. cyclic-order axioms ---------------------------------------------------


_SQRT2, _SQRT3 = Coefficient.sqrt(2), Coefficient.sqrt(3)
_COMPONENTS = [0, 1, -1, 2, -2, Fraction(1, 2), Fraction(-3, 2), _SQRT2, -_SQRT2, _SQRT3, _SQRT2 - 1, 1 - _SQRT3]


def _random_direction(rng):
    while True:
        c1, c2 = rng.choice(_COMPONENTS), rng.choice(_COMPONENTS)
        if c1 != 0 or c2 != 0:
            return ResidueDirection(c1, c2)


def _angle(d):
    with mpmath.workprec(200):
        return mpmath.atan2(to_mpf(d.c2, 200), to_mpf(d.c1, 200)) % (2 * mpmath.pi)


def _angle_order(a, b, c):
    # oracle: counterclockwise sweep from a meets b before c
    ta, tb, tc = (_angle(d) for d in (a, b, c))
    if min(abs(tb - ta), abs(tc - ta), abs(tc - tb)) < mpmath.mpf(10) ** -40:
        return 0
    two_pi = 2 * mpmath.pi
    return 1 if (tb - ta) % two_pi < (tc - ta) % two_pi else -1


def test_criterion_2_cyclic_order_axioms(criterion):
    rng = random.Random(2)
    failures, collisions = 0, 0
    for _ in range(10_000):
        a, b, c, d = (_random_direction(rng) for _ in range(4))
        o = cyclic_order(a, b, c)
        collide = a.parallel(b) or b.parallel(c) or a.parallel(c)
        collisions += collide
        if (o == 0) != collide or o != _angle_order(a, b, c):
            failures += 1
        if not (o == cyclic_order(b, c, a) == -cyclic_order(a, c, b)):
            failures += 1
        if o == 1 and cyclic_order(a, c, d) == 1 and cyclic_order(a, b, d) != 1:
            failures += 1
    ok = failures == 0 and collisions > 0
    assert criterion(
        "criterion 2 (cyclic-order axioms)", ok, f"10000 quadruples, {collisions} with collisions, {failures} failures"
    )


# -- 3. germs versus residue directions ---------------------------------------


def test_criterion_3_germ_bijection(criterion):
    rng = random.Random(3)
    total = agree = equal = 0
    for name in SHIPPED_FAMILIES:
        pts = SAMPLES[name]
        for _ in range(400):
            p, x, y = rng.sample(pts, 3)
            same = germ_equal(p, x, y)
            parallel = germ_direction(p, x).parallel(germ_direction(p, y))
            total += 1
            agree += same == parallel
            equal += same
    ok = total >= 1000 and agree == total and 0 < equal < total
    assert criterion("criterion 3 (germ bijection)", ok, f"{agree}/{total} agree, {equal} equal germs")


# -- 4. translation lengths ---------------------------------------------------


def test_criterion_4_translation_lengths(criterion):
    checked = mismatches = law_failures = hyperbolic = 0
    x = TreePoint(ORIGIN)
    for rep in FAMILIES.values():
        for w in rep.words(4):
            ell = translation_length(rep, w)
            checked += 1
            mismatches += ell != trace_length(rep, w)
            if ell > 0:
                hyperbolic += 1
                d = [tree_dist(x, TreePoint(act(rep, w**n, ORIGIN))) for n in (1, 2, 3)]
                law_failures += (d[1] - d[0] != ell) + (d[2] - d[1] != ell)
    ok = mismatches == 0 and law_failures == 0 and hyperbolic > 0
    assert criterion(
        "criterion 4 (two-oracle translation length)",
        ok,
        f"{checked} words, {mismatches} mismatches, {hyperbolic} hyperbolic, {law_failures} n-step failures",
    )


# -- 5. equivariance of orientation -------------------------------------------


def test_criterion_5_orientation_invariance(criterion):
    rng = random.Random(5)
    checks = failures = nonzero = 0
    for name, rep in FAMILIES.items():
        pts = SAMPLES[name]
        tripods = [rng.sample(pts, 3) for _ in range(50)]
        signs = [tripod_orientation(*tri) for tri in tripods]
        nonzero += sum(1 for s in signs if s)
        for _ in range(50):
            word = random_word(rng, rep, 4)
            for tri, s in zip(tripods, signs):
                moved = [TreePoint(act(rep, word, p.lift)) for p in tri]
                checks += 1
                failures += tripod_orientation(*moved) != s
    ok = failures == 0 and nonzero > 0
    assert criterion(
        "criterion 5 (orientation invariance)", ok, f"{checks} word-tripod pairs, {nonzero} nondegenerate, {failures} failures"
    )


# -- 6. field morphism t -> t^2 -----------------------------------------------


def test_criterion_6_morphism_invariance(criterion):
    dist_failures = orient_failures = pairs = triples = 0
    for name, rep in FAMILIES.items():
        pts = SAMPLES[name]
        images = [p.substitute(2) for p in pts]
        direct = orbit_sample(rep.substitute(2), 2)
        dist_failures += len(direct) != len(images)
        for i, j in itertools.combinations(range(len(pts)), 2):
            pairs += 1
            dist_failures += tree_dist(images[i], images[j]) != 2 * tree_dist(pts[i], pts[j])
        for i, j, k in itertools.combinations(range(len(pts)), 3):
            triples += 1
            orient_failures += tripod_orientation(images[i], images[j], images[k]) != tripod_orientation(
                pts[i], pts[j], pts[k]
            )
    ok = dist_failures == 0 and orient_failures == 0
    assert criterion(
        "criterion 6 (morphism t -> t^2)",
        ok,
        f"{pairs} pairs, {dist_failures} distance failures; {triples} tripods, {orient_failures} orientation failures",
    )


# -- 7. rescaled distances converge -------------------------------------------


def test_criterion_7_asymptotic_cone(criterion):
    details, ok = [], True
    for name, rep in FAMILIES.items():
        start = time.perf_counter()
        rows = limit_table(rep, pairs_upto(rep, 2))
        report = convergence_check(rows)
        elapsed = time.perf_counter() - start
        ok &= report.passed and elapsed < 60 and all(r.kind == "pair" for r in rows)
        details.append(f"{name}: {len(rows)} rows, {len(report.failures)} failures in {elapsed:.1f}s")
    assert criterion("criterion 7 (asymptotic-cone convergence)", ok, "; ".join(details))


# -- 8. orientation in the limit ----------------------------------------------


def test_criterion_8_orientation_limit(criterion):
    details, ok = [], True
    for name, rep in FAMILIES.items():
        tripods = list(itertools.combinations(rep.words(2), 3))
        report = orientation_compare(rep, tripods)
        bad = report.disagreements_below(Fraction(1, 10**4))
        ok &= not bad
        checked = len(tripods) - len(report.degenerate)
        details.append(f"{name}: {checked} nondegenerate, {len(bad)} disagreements")
    assert criterion("criterion 8 (orientation limit, t <= 1e-4)", ok, "; ".join(details))


# -- 9. oriented epsilon-approximations ---------------------------------------


@pytest.mark.parametrize("factor", [1, 2])
def test_criterion_9_oriented_approximation(criterion, factor):
    config = RealConfig(delta0=factor * DELTA0)
    details, ok = [], True
    for name, rep in FAMILIES.items():
        K = rep.words(2)
        result = oriented_approximation_check(rep, Fraction(1, 10**6), K, K, 0.05, config)
        ok &= result.ok
        details.append(f"{name}: max gap {result.max_gap:.4f}, {result.tripods_checked} tripods")
    label = "criterion 9 (oriented 0.05-approximation at t = 1e-6)"
    if factor != 1:
        label += f" with delta0 x{factor}"
    assert criterion(label, ok, "; ".join(details))


# -- 10. minimal-vector defect ------------------------------------------------


def test_criterion_10_minimal_vector(criterion):
    rotations = min_vector_defect(load_family("rotations"), Fraction(1, 3))
    unipotent = min_vector_defect(load_family("unipotent"), Fraction(1, 2))
    spread = 0.0
    for rep in FAMILIES.values():
        base = min_vector_defect(rep, Fraction(1, 10))
        for a, b, c in [(3, 4, 5), (5, 12, 13), (8, 15, 17)]:
            rot = RepMatrix(Fraction(a, c), Fraction(-b, c), Fraction(b, c), Fraction(a, c))
            spread = max(spread, abs(min_vector_defect(rep.conjugate(rot), Fraction(1, 10)) - base) / max(1, base))
    ok = rotations <= 1e-10 and unipotent > 1e-3 and spread <= 1e-10
    assert criterion(
        "criterion 10 (minimal-vector defect)",
        ok,
        f"rotations {rotations:.2e}, unipotent {unipotent:.4f}, conjugation spread {spread:.2e}",
    )
