import logging
from fractions import Fraction

import pytest
import sympy as sp

from pbe_djm import algebra as alg
from pbe_djm.algebra import DIRAC, ONE, Term, TPoly, monomial
from pbe_djm.engine import (Aggregation, ProblemSpec, aggregation_G, aggregation_N, breakage_rhs,
                            closed_form_term, compute_series, example_spec, next_component)
from pbe_djm.errors import TermBlowup, UnknownExample, UnsupportedClass

from conftest import sympy_to_expr, t_sym as t, u_sym as u

E = sp.exp(-u)
E2 = sp.exp(-2 * u)


def test_breakage_rhs_limits_to_two_at_origin():
    rhs = breakage_rhs(example_spec(1), example_spec(1).initial)
    assert rhs == monomial(2, rate=1) - monomial(1, u=1, rate=1)
    assert alg.evaluate(rhs, 0, 1e-9)[0] == pytest.approx(2.0)


def test_first_components_of_example1():
    s = compute_series(example_spec(1), 2)
    assert s.components[1] == monomial(2, t=1, rate=1) - monomial(1, t=1, u=1, rate=1)
    assert s.phi(1) == alg.add(s.components[0], s.components[1])


def test_first_component_of_example3():
    s = compute_series(example_spec(3), 1)
    expected = monomial(-1, t=1, r=1, dist=DIRAC) + monomial(2, t=1, dist=alg.THETA)
    assert s.components[1] == expected


@pytest.mark.parametrize("example", [1, 2, 3, 4])
def test_closed_forms_short(example):
    s = compute_series(example_spec(example), 8)
    for m, c in enumerate(s.components):
        assert c == closed_form_term(example, m)


def test_example5_printed_terms():
    s = compute_series(example_spec(5), 2)
    c1 = t * (2 * E - E * u) + t * (-E + E * u / 2)
    c2 = (sp.Rational(1, 4) * E * t ** 2 * (2 - 4 * u + u ** 2) - t * (-E + E * u / 2)
          + sp.Rational(1, 144) * E * t * (72 * (-2 + u) - 18 * t * (6 + (-6 + u) * u)
                                           + t ** 2 * (-24 + (-6 + u) ** 2 * u)))
    assert s.components[1] == sympy_to_expr(c1, 1)
    assert s.components[2] == sympy_to_expr(c2, 1)


def test_example6_first_term():
    s = compute_series(example_spec(6), 1)
    c1 = t * (-4 * E2 * u + sp.Rational(4, 3) * E2 * u ** 3) + t * (-4 * E2 * u ** 2 + E2 * (2 + 4 * u))
    assert s.components[1] == sympy_to_expr(c1, 2)


@pytest.mark.parametrize("example", [5, 6])
def test_bilinear_increment_equals_literal_difference(example):
    spec = example_spec(example)
    s = compute_series(spec, 4)
    for m in range(1, 5):
        literal = alg.add(aggregation_N(s.phi(m)), alg.scale(aggregation_N(s.phi(m - 1)), -1))
        assert aggregation_G(spec, s.components[: m + 1]) == literal


def test_zeroth_moment_of_example1():
    s = compute_series(example_spec(1), 12)
    assert alg.total_moment(s.phi(), 0) == TPoly({(0, 0): 1, (1, 0): 1})


def test_zeroth_moment_of_example5_starts_like_logistic():
    # mu0' = mu1 - mu0^2/2 with mu1 = 1, mu0(0) = 1
    s = compute_series(example_spec(5), 3)
    mu0 = alg.total_moment(s.phi(), 0)
    assert mu0[(0, 0)] == 1 and mu0[(1, 0)] == Fraction(1, 2) and mu0[(2, 0)] == Fraction(-1, 4)


def test_series_is_deterministic():
    a = compute_series(example_spec(6), 3)
    b = compute_series(example_spec(6), 3)
    assert [str(c) for c in a.components] == [str(c) for c in b.components]


def test_zero_terms():
    s = compute_series(example_spec(2), 0)
    assert s.n == 0 and s.phi() == example_spec(2).initial


def test_term_blowup_keeps_partial_series():
    with pytest.raises(TermBlowup) as info:
        compute_series(example_spec(5), 6, term_cap=200)
    partial = info.value.series
    assert partial is not None and 1 <= partial.n < 6
    assert info.value.code == "TERM_BLOWUP"


def test_next_component_needs_c0():
    with pytest.raises(ValueError):
        next_component(example_spec(1), [])


def test_unknown_example():
    with pytest.raises(UnknownExample):
        example_spec(7)
    with pytest.raises(UnknownExample):
        closed_form_term(5, 1)


def test_aggregation_rejects_distributional_data():
    with pytest.raises(UnsupportedClass):
        ProblemSpec(1, monomial(1, dist=DIRAC), Aggregation.CONSTANT_UNIT, True)
    with pytest.raises(UnsupportedClass):
        ProblemSpec(1, monomial(1, rate=1) + monomial(1, rate=2), Aggregation.CONSTANT_UNIT)


def test_unvalidated_power_warns(caplog):
    with caplog.at_level(logging.WARNING):
        spec = ProblemSpec(3, monomial(1, rate=1))
    assert not spec.validated
    assert "validated" in caplog.text
    s = compute_series(spec, 3)
    for c in s.components[1:]:
        assert alg.total_moment(c, 1) == TPoly()
