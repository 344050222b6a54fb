import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import strategies as st

from pbe_djm import algebra as alg
from pbe_djm.algebra import DIRAC, ONE, THETA, Term

RATES = (Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3, 2))

t_sym, u_sym, r_sym = sp.symbols("t u r")


def sympy_to_expr(expr, rate):
    """Convert ``poly(t, u, r) * exp(-rate*u)`` written in sympy to an Expr."""
    poly = sp.Poly(sp.expand(sp.simplify(expr * sp.exp(rate * u_sym))), t_sym, u_sym, r_sym)
    terms = []
    for (a, b, c), coeff in poly.terms():
        coeff = sp.Rational(coeff)
        terms.append(Term(Fraction(int(coeff.p), int(coeff.q)), a, b, c, Fraction(rate)))
    return alg.normalize(terms)


# --- random small expressions -------------------------------------------------

def random_term(rng, dist=None, rate=None):
    dist = dist if dist is not None else rng.choice((ONE, ONE, DIRAC, THETA))
    if rate is None:
        rate = rng.choice(RATES) if dist is ONE else Fraction(0)
    coeff = Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 6))
    return Term(coeff, rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 2), rate, dist)


def random_expr(rng, n_max=4, dist=None, rate=None):
    return alg.normalize(random_term(rng, dist, rate) for _ in range(rng.randint(0, n_max)))


@st.composite
def terms(draw, smooth=False, rate=None):
    dist = ONE if smooth else draw(st.sampled_from((ONE, DIRAC, THETA)))
    if dist is ONE:
        lam = rate if rate is not None else draw(st.sampled_from(RATES))
    else:
        lam = Fraction(0)
    coeff = draw(st.fractions(min_value=-10, max_value=10, max_denominator=12))
    return Term(coeff, draw(st.integers(0, 3)), draw(st.integers(0, 3)),
                draw(st.integers(0, 2)), lam, dist)


@st.composite
def exprs(draw, smooth=False, rate=None, max_size=4):
    return alg.normalize(draw(st.lists(terms(smooth, rate), max_size=max_size)))


@st.composite
def raw_term_lists(draw):
    """Term lists including zero coefficients, duplicates and u-powers on deltas."""
    base = draw(st.lists(terms(), max_size=6))
    dup = draw(st.lists(st.sampled_from(base), max_size=3)) if base else []
    zero = [t._replace(coeff=Fraction(0)) for t in draw(st.lists(terms(), max_size=2))]
    out = base + dup + zero
    return draw(st.permutations(out))


@pytest.fixture
def rng():
    return random.Random(20240519)


# --- acceptance summary ---------------------------------------------------------

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
