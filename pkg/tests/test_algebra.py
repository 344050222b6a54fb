from fractions import Fraction

import math
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from pbe_djm import algebra as alg
from pbe_djm.algebra import DIRAC, ONE, THETA, Term, TPoly, monomial
from pbe_djm.errors import DivergentMoment, DivergentTail, MissingRadius, MixedRates, UnsupportedClass

from conftest import RATES, exprs, random_expr, random_term, raw_term_lists

E_U = monomial(1, rate=1)
DELTA = monomial(1, dist=DIRAC)
THETA_1 = monomial(1, dist=THETA)


# --- normalize ---------------------------------------------------------------

def test_normalize_cancels_opposite_terms():
    assert alg.normalize([Term(Fraction(1), exp_rate=Fraction(1)),
                          Term(Fraction(-1), exp_rate=Fraction(1))]) == alg.ZERO


def test_normalize_sifts_u_power_of_dirac():
    e = alg.normalize([Term(Fraction(1), u_pow=1, dist=DIRAC)])
    assert e.terms == (Term(Fraction(1), r_pow=1, dist=DIRAC),)


def test_normalize_merges_like_terms():
    e = alg.normalize([Term(Fraction(2), t_pow=1, dist=THETA), Term(Fraction(3), t_pow=1, dist=THETA)])
    assert e == monomial(5, t=1, dist=THETA)


def test_normalize_rejects_negative_powers():
    with pytest.raises(ValueError):
        alg.normalize([Term(Fraction(1), u_pow=-1, exp_rate=Fraction(1))])


def test_canonical_order():
    e = monomial(1, u=2, rate=1) + monomial(1, dist=THETA) + monomial(3, t=1, rate=1) + DELTA
    keys = [t.key for t in e.terms]
    assert keys == sorted(keys)
    assert [t.dist for t in e.terms] == [ONE, ONE, DIRAC, THETA]


@given(raw_term_lists())
def test_normalize_idempotent(raw):
    once = alg.normalize(raw)
    assert alg.normalize(once.terms) == once
    assert all(t.coeff != 0 for t in once.terms)
    assert all(t.u_pow == 0 for t in once.terms if t.dist is DIRAC)


@given(raw_term_lists(), st.randoms(use_true_random=False))
def test_normalize_order_independent(raw, rnd):
    shuffled = list(raw)
    rnd.shuffle(shuffled)
    assert alg.normalize(shuffled).terms == alg.normalize(raw).terms


# --- add / scale ----------------------------------------------------------------

def test_add_identity_and_scale_annihilation():
    x = monomial(3, t=2, u=1, rate=2) + DELTA
    assert alg.add(x, alg.ZERO) == x
    assert alg.scale(x, 0) == alg.ZERO


def test_phi1_of_example1():
    # e^-u - t e^-u (u - 2)
    c1 = alg.normalize([Term(Fraction(-1), 1, 1, 0, Fraction(1)), Term(Fraction(2), 1, 0, 0, Fraction(1))])
    phi1 = alg.add(E_U, c1)
    assert phi1.terms == (Term(Fraction(1), 0, 0, 0, Fraction(1)),
                          Term(Fraction(2), 1, 0, 0, Fraction(1)),
                          Term(Fraction(-1), 1, 1, 0, Fraction(1)))


@given(exprs(), exprs(), st.fractions(max_denominator=9))
def test_vector_space(x, y, s):
    assert alg.add(x, alg.scale(x, -1)) == alg.ZERO
    assert alg.add(x, y) == alg.add(y, x)
    assert alg.scale(alg.add(x, y), s) == alg.add(alg.scale(x, s), alg.scale(y, s))


# --- mul_tpoly / shift ----------------------------------------------------------

def test_mul_tpoly_examples():
    assert alg.mul_tpoly(E_U, {(0, 0): 1}) == E_U
    assert alg.mul_tpoly(E_U, {(1, 0): -1}) == monomial(-1, t=1, rate=1)
    f = monomial(4, u=1, rate=2)
    mu0 = alg.total_moment(f, 0)
    quad, _ = integrate.quad(lambda u: 4 * u * math.exp(-2 * u), 0, np.inf)
    assert quad == pytest.approx(1.0, abs=1e-12)
    assert mu0 == TPoly({(0, 0): 1})
    assert alg.mul_tpoly(f, mu0) == f


def test_shift_u_power_examples():
    assert alg.shift_u_power(E_U, 1) == monomial(1, u=1, rate=1)
    assert alg.shift_u_power(DELTA, 2) == monomial(1, r=2, dist=DIRAC)
    assert alg.shift_u_power(THETA_1, 1) == monomial(1, u=1, dist=THETA)


# --- tail integral ----------------------------------------------------------------

def test_tail_integral_examples():
    assert alg.tail_integral(E_U, 0) == E_U
    assert alg.tail_integral(DELTA, 0) == THETA_1
    c1 = alg.time_antiderivative(alg.scale(alg.tail_integral(DELTA, 0), 2))
    assert c1 == monomial(2, t=1, dist=THETA)


@pytest.mark.parametrize("u", [0.0, 0.3, 1.0, 4.5])
def test_tail_integral_of_v_exp_matches_quadrature(u):
    expr = alg.tail_integral(monomial(1, u=1, rate=1), 0)
    assert expr == monomial(1, u=1, rate=1) + E_U
    quad, _ = integrate.quad(lambda v: v * math.exp(-v), u, np.inf, epsabs=1e-14)
    assert alg.evaluate(expr, 0, u)[0] == pytest.approx(quad, rel=1e-12)


@pytest.mark.parametrize("n,w,lam", [(0, 1, Fraction(1)), (2, 0, Fraction(2)), (3, 1, Fraction(1, 2))])
def test_tail_integral_smooth_quadrature(n, w, lam):
    expr = alg.tail_integral(monomial(1, u=n, rate=lam), w)
    for u in (0.2, 1.7, 5.0):
        quad, _ = integrate.quad(lambda v: v ** (n + w) * math.exp(-float(lam) * v), u, np.inf,
                                 epsabs=1e-13, epsrel=1e-13)
        assert alg.evaluate(expr, 0, u)[0] == pytest.approx(quad, rel=1e-10)


def test_tail_integral_theta_polynomial():
    # int_u^r v^2 dv = (r^3 - u^3) / 3 on u < r
    expr = alg.tail_integral(monomial(1, u=2, dist=THETA), 0)
    assert expr == monomial(Fraction(1, 3), r=3, dist=THETA) + monomial(Fraction(-1, 3), u=3, dist=THETA)
    assert alg.evaluate(expr, 0, 0.5, r=2)[0] == pytest.approx((8 - 0.125) / 3)
    assert alg.evaluate(expr, 0, 2.5, r=2)[0] == 0


def test_tail_integral_errors():
    with pytest.raises(DivergentTail):
        alg.tail_integral(monomial(1, u=2), 0)
    with pytest.raises(UnsupportedClass):
        alg.tail_integral(monomial(1, rate=1, dist=THETA), 0)


# --- convolution ------------------------------------------------------------------

def test_convolve_examples():
    assert alg.convolve(E_U, E_U) == monomial(1, u=1, rate=1)
    assert alg.convolve(alg.ZERO, E_U) == alg.ZERO
    f = monomial(4, u=1, rate=2)
    assert alg.convolve(f, f) == monomial(Fraction(8, 3), u=3, rate=2)


@pytest.mark.parametrize("u", [0.4, 1.0, 3.3])
def test_convolve_matches_quadrature(u):
    f = lambda v: 4 * v * math.exp(-2 * v)
    quad, _ = integrate.quad(lambda v: f(v) * f(u - v), 0, u, epsabs=1e-14)
    conv = alg.convolve(monomial(4, u=1, rate=2), monomial(4, u=1, rate=2))
    assert alg.evaluate(conv, 0, u)[0] == pytest.approx(quad, rel=1e-12)


def test_convolve_errors():
    with pytest.raises(MixedRates):
        alg.convolve(E_U, monomial(1, rate=2))
    with pytest.raises(UnsupportedClass):
        alg.convolve(E_U, DELTA)


@given(exprs(smooth=True, rate=Fraction(1)), exprs(smooth=True, rate=Fraction(1)),
       exprs(smooth=True, rate=Fraction(1)))
def test_convolve_symmetric_and_bilinear(a, b, c):
    assert alg.convolve(a, b) == alg.convolve(b, a)
    assert alg.convolve(alg.add(a, b), c) == alg.add(alg.convolve(a, c), alg.convolve(b, c))
    assert alg.convolve(alg.scale(a, 3), b) == alg.scale(alg.convolve(a, b), 3)


# --- moments ----------------------------------------------------------------------

def test_total_moment_examples():
    assert alg.total_moment(E_U, 0) == TPoly({(0, 0): 1})
    assert alg.total_moment(DELTA, 1) == TPoly({(0, 1): 1})
    assert alg.total_moment(THETA_1, 0) == TPoly({(0, 1): 1})


def test_total_moment_errors():
    with pytest.raises(DivergentMoment):
        alg.total_moment(monomial(1, u=1), 0)
    with pytest.raises(UnsupportedClass):
        alg.total_moment(monomial(1, rate=1, dist=DIRAC), 0)


def _trapezoid_moment(term, j, h):
    us = np.arange(0, 60 + h / 2, h)
    vals, _ = alg.evaluate_grid(alg.normalize([term]), 0, us)
    return integrate.trapezoid(us ** j * vals, us)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 3), st.sampled_from([Fraction(1), Fraction(3, 2), Fraction(2)]),
       st.integers(0, 2), st.fractions(min_value=-5, max_value=5, max_denominator=7).filter(bool))
def test_moment_matches_trapezoid(u_pow, lam, j, coeff):
    term = Term(coeff, 0, u_pow, 0, lam)
    # trapezoid with one Richardson step on h = 4e-3
    coarse, fine = _trapezoid_moment(term, j, 4e-3), _trapezoid_moment(term, j, 2e-3)
    numeric = (4 * fine - coarse) / 3
    exact = float(alg.total_moment(alg.normalize([term]), j).evaluate(0))
    assert numeric == pytest.approx(exact, rel=1e-8)


# --- time antiderivative --------------------------------------------------------

def test_time_antiderivative_examples():
    e = monomial(2, rate=1) - monomial(1, u=1, rate=1)
    assert alg.time_antiderivative(e) == alg.mul_tpoly(e, {(1, 0): 1})
    assert alg.time_antiderivative(alg.ZERO) == alg.ZERO
    assert alg.time_antiderivative(monomial(1, t=2, dist=THETA)) == monomial(Fraction(1, 3), t=3, dist=THETA)


# --- linearity of the transforms ----------------------------------------------------

@given(exprs(), exprs(), st.fractions(max_denominator=9), st.integers(0, 2))
def test_transforms_are_linear(x, y, s, w):
    comb = alg.add(x, alg.scale(y, s))
    assert alg.tail_integral(comb, w) == alg.add(alg.tail_integral(x, w), alg.scale(alg.tail_integral(y, w), s))
    assert alg.total_moment(comb, w) == alg.total_moment(x, w) + alg.total_moment(y, w) * s
    assert alg.time_antiderivative(comb) == alg.add(alg.time_antiderivative(x),
                                                    alg.scale(alg.time_antiderivative(y), s))


# --- evaluation ---------------------------------------------------------------------

def test_evaluate_examples():
    assert alg.evaluate(E_U, 0, 0) == (1.0, 0.0)
    assert alg.evaluate(monomial(2, t=1, dist=THETA), 1, 2, r=1) == (0.0, 0.0)
    assert alg.evaluate(monomial(3, t=1, r=1, dist=DIRAC), 2, 0.5, r=Fraction(1, 2)) == (0.0, 3.0)


def test_evaluate_requires_radius():
    with pytest.raises(MissingRadius):
        alg.evaluate(THETA_1, 0, 1)


def test_evaluate_example1_phi100():
    from pbe_djm.engine import compute_series, example_spec
    phi = compute_series(example_spec(1), 100).phi()
    value, dirac = alg.evaluate(phi, Fraction(9, 10), 1)
    assert value == pytest.approx(1.9 ** 2 * math.exp(-1.9), abs=1e-12)
    assert dirac == 0


def test_as_rational_reads_decimal_repr():
    assert alg.as_rational(0.1) == Fraction(1, 10)
    assert alg.as_rational(Fraction(1, 3)) == Fraction(1, 3)
    with pytest.raises(ValueError):
        alg.as_rational(float("nan"))


def test_evaluate_grid_is_exact_before_rounding():
    # 1e20 * e^-u - (1e20 - 1) * e^-u cancels only if summed exactly
    e = monomial(10 ** 20, rate=1) + monomial(-(10 ** 20 - 1), rate=1)
    vals, _ = alg.evaluate_grid(e + monomial(1, u=1, rate=1) - monomial(1, u=1, rate=1), 0, [0.0, 1.0])
    assert vals == pytest.approx([1.0, math.exp(-1)], rel=1e-15)


def test_tpoly_str():
    assert str(alg.TPoly()) == "0"
    assert str(TPoly({(0, 0): 1, (1, 0): 1, (2, 1): Fraction(-1, 2)})) == "1 + t - 1/2*t^2*r"
