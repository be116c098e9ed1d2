from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from isotropy.ratfun import Polynomial, RationalFunction

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Collect a PASS/FAIL line for the end-of-run summary."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


small_ints = st.integers(min_value=-9, max_value=9)


@st.composite
def polynomials(draw, max_degree=8, nonzero=False):
    coeffs = draw(st.lists(small_ints, min_size=1, max_size=max_degree + 1))
    if nonzero and not any(coeffs):
        coeffs[-1] = draw(st.integers(1, 9))
    return Polynomial(coeffs)


@st.composite
def rational_functions(draw, max_degree=8):
    num = draw(polynomials(max_degree))
    den = draw(polynomials(max_degree, nonzero=True))
    return RationalFunction.from_polynomials(num, den)


@st.composite
def nonzero_rational_functions(draw, max_degree=8):
    num = draw(polynomials(max_degree, nonzero=True))
    den = draw(polynomials(max_degree, nonzero=True))
    return RationalFunction.from_polynomials(num, den)


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
