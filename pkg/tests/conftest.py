from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lambdatrees.field import PuiseuxElement
from lambdatrees.hplane import ORIGIN, RepMatrix, mobius_apply

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(label, ok, detail=""):
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)

small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
nonzero_rationals = small_rationals.filter(lambda q: q != 0)
exponents = st.integers(min_value=-6, max_value=6).map(lambda k: Fraction(k, 2))


@st.composite
def laurent_elements(draw, min_terms=0, max_terms=4, exps=exponents):
    """Random finite Puiseux sums in ``t^(1/2)`` with small rational coefficients."""
    keys = draw(st.lists(exps, min_size=min_terms, max_size=max_terms, unique=True))
    return PuiseuxElement.from_terms({e: draw(nonzero_rationals) for e in keys})


nonzero_elements = laurent_elements(min_terms=1)


@st.composite
def sl2_matrices(draw, max_factors=3):
    """Random products of unipotent and diagonal matrices over Laurent polynomials in ``t^(1/2)``."""
    small = laurent_elements(max_terms=2, exps=st.integers(-2, 2).map(lambda k: Fraction(k, 2)))
    m = RepMatrix.identity()
    for _ in range(draw(st.integers(1, max_factors))):
        kind = draw(st.sampled_from(["upper", "lower", "diag"]))
        if kind == "diag":
            e = Fraction(draw(st.integers(-2, 2)), 2)
            q = draw(st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 3)]))
            f = RepMatrix(
                PuiseuxElement.monomial(q, e), 0, 0, PuiseuxElement.monomial(1 / q, -e), check=False
            )
        else:
            x = draw(small)
            f = RepMatrix(1, x, 0, 1, check=False) if kind == "upper" else RepMatrix(1, 0, x, 1, check=False)
        m = m @ f
    return m


@st.composite
def disk_points(draw):
    """Images of the origin under random ``sl2_matrices``."""
    return mobius_apply(draw(sl2_matrices(max_factors=2)), ORIGIN)
