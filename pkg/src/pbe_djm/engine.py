"""Daftardar-Jafari series for the breakage and aggregation-breakage equations.

The equation solved is

    dc/dt = int_u^inf (2/v) v^k c(t,v) dv - u^k c(t,u)
            + [ 1/2 int_0^u c(t,v) c(t,u-v) dv - c(t,u) int_0^inf c(t,v) dv ]

where the bracket is present only for the constant aggregation kernel.  The
linear (breakage) part is iterated term by term, the quadratic part through
the telescoping increments ``G_m = N(S_m) - N(S_{m-1})`` of the partial sums
``S_m = c_0 + ... + c_m``, and every increment is integrated in time from 0:

    c_{m+1} = int_0^t [ breakage(c_m) + G_m ] ds.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import List, Optional, Sequence, Tuple

from . import algebra as alg
from .algebra import DIRAC, ONE, THETA, Expr, monomial
from .errors import TermBlowup, UnknownExample, UnsupportedClass

logger = logging.getLogger(__name__)

DEFAULT_TERM_CAP = 2_000_000
VALIDATED_POWERS = (1, 2)


class Aggregation(enum.Enum):
    NONE = "none"
    CONSTANT_UNIT = "constant"


@dataclass(frozen=True)
class ProblemSpec:
    """Kernels and initial data of one problem.

    Breakage is always binary uniform, ``B(u, v) = 2/v``; the selection rate
    is ``S(v) = v**selection_power``.
    """

    selection_power: int
    initial: Expr
    aggregation: Aggregation = Aggregation.NONE
    has_radius: bool = False
    name: str = ""

    def __post_init__(self):
        if self.selection_power < 1:
            raise ValueError("selection_power must be a positive integer")
        if self.initial.references_r and not self.has_radius:
            raise UnsupportedClass("initial data references r but has_radius is False")
        if self.aggregation is Aggregation.CONSTANT_UNIT:
            if not self.initial.is_smooth:
                raise UnsupportedClass("aggregation requires smooth initial data")
            if len(self.initial.rates) > 1:
                raise UnsupportedClass("aggregation requires a single exponential rate")
        if not self.validated:
            logger.warning("selection power k=%d is outside the validated set %s",
                           self.selection_power, VALIDATED_POWERS)

    @property
    def validated(self) -> bool:
        return self.selection_power in VALIDATED_POWERS

    @property
    def has_aggregation(self) -> bool:
        return self.aggregation is Aggregation.CONSTANT_UNIT

    # the built-in breakage function satisfies both constraints by construction:
    # int_0^v 2/v du = 2 fragments, int_0^v u * 2/v du = v (volume kept)
    fragments_per_event = 2


@dataclass(frozen=True)
class SeriesSolution:
    spec: ProblemSpec
    components: Tuple[Expr, ...]
    partial_sums: Tuple[Expr, ...]

    @property
    def n(self) -> int:
        return len(self.components) - 1

    def phi(self, n: Optional[int] = None) -> Expr:
        """Partial sum ``c_0 + ... + c_n`` (default: all computed terms)."""
        return self.partial_sums[self.n if n is None else n]


def breakage_rhs(spec: ProblemSpec, c: Expr) -> Expr:
    """Breakage operator ``2 int_u^inf v^(k-1) c dv - u^k c``."""
    k = spec.selection_power
    return alg.add(alg.scale(alg.tail_integral(c, k - 1), 2), alg.scale(alg.shift_u_power(c, k), -1))


def aggregation_N(c: Expr) -> Expr:
    """Constant-kernel aggregation operator ``1/2 c*c - c mu_0(c)``."""
    return alg.add(alg.scale(alg.convolve(c, c), Fraction(1, 2)),
                   alg.scale(alg.mul_tpoly(c, alg.total_moment(c, 0)), -1))


def _check_cap(n_terms: int, cap: int, what: str) -> None:
    if n_terms > cap:
        raise TermBlowup(f"{what} needs {n_terms} terms, cap is {cap}")


def aggregation_G(spec: ProblemSpec, components: Sequence[Expr],
                  partial_sums: Optional[Sequence[Expr]] = None,
                  term_cap: int = DEFAULT_TERM_CAP) -> Expr:
    """Increment ``G_m = N(S_m) - N(S_{m-1})`` for ``m = len(components) - 1``.

    Uses the bilinear expansion

        G_m = 1/2 c_m * (S_m + S_{m-1}) - c_m mu_0(S_m) - S_{m-1} mu_0(c_m)

    which equals the literal difference but never forms ``N(S_m)``.
    The term cap bounds the raw (pre-merge) term count of the convolution.
    """
    if not spec.has_aggregation:
        return alg.ZERO
    m = len(components) - 1
    if m < 0:
        raise ValueError("need at least one component")
    c_m = components[m]
    if partial_sums is None:
        s_m = alg.sum_exprs(components)
        s_prev = alg.sum_exprs(components[:m])
    else:
        s_m = partial_sums[m]
        s_prev = partial_sums[m - 1] if m else alg.ZERO
    if m == 0:
        _check_cap(len(c_m) ** 2, term_cap, "G_0 convolution")
        return aggregation_N(c_m)
    both = alg.add(s_m, s_prev)
    _check_cap(len(c_m) * len(both), term_cap, f"G_{m} convolution")
    birth = alg.scale(alg.convolve(c_m, both), Fraction(1, 2))
    death = alg.add(alg.mul_tpoly(c_m, alg.total_moment(s_m, 0)),
                    alg.mul_tpoly(s_prev, alg.total_moment(c_m, 0)))
    return alg.add(birth, alg.scale(death, -1))


def next_component(spec: ProblemSpec, components: Sequence[Expr],
                   partial_sums: Optional[Sequence[Expr]] = None,
                   term_cap: int = DEFAULT_TERM_CAP) -> Expr:
    """``c_{m+1} = int_0^t [breakage(c_m) + G_m] ds`` for the last ``c_m``."""
    if not components:
        raise ValueError("series must contain at least c_0")
    rhs = breakage_rhs(spec, components[-1])
    if spec.has_aggregation:
        rhs = alg.add(rhs, aggregation_G(spec, components, partial_sums, term_cap))
    nxt = alg.time_antiderivative(rhs)
    _check_cap(len(nxt), term_cap, f"component c_{len(components)}")
    return nxt


def compute_series(spec: ProblemSpec, n: int, term_cap: int = DEFAULT_TERM_CAP) -> SeriesSolution:
    """Components ``c_0..c_n`` and partial sums ``Phi_0..Phi_n``.

    Raises :class:`TermBlowup` when a component (or a convolution feeding it)
    would exceed ``term_cap`` terms; the exception's ``series`` attribute
    holds everything computed up to that point.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    comps: List[Expr] = [spec.initial]
    sums: List[Expr] = [spec.initial]
    for m in range(n):
        try:
            c = next_component(spec, comps, sums, term_cap)
        except TermBlowup as exc:
            raise TermBlowup(str(exc), SeriesSolution(spec, tuple(comps), tuple(sums))) from None
        comps.append(c)
        sums.append(alg.add(sums[-1], c))
        logger.debug("%s: c_%d has %d terms", spec.name, m + 1, len(c))
    return SeriesSolution(spec, tuple(comps), tuple(sums))


# --------------------------------------------------------------------------
# the six test problems and the printed general terms
# --------------------------------------------------------------------------

def example_spec(example_id: int) -> ProblemSpec:
    """Problem definition of test case 1..6."""
    exp_u = monomial(1, rate=1)
    delta = monomial(1, dist=DIRAC)
    table = {
        1: (1, exp_u, Aggregation.NONE, False),
        2: (2, exp_u, Aggregation.NONE, False),
        3: (1, delta, Aggregation.NONE, True),
        4: (2, delta, Aggregation.NONE, True),
        5: (1, exp_u, Aggregation.CONSTANT_UNIT, False),
        6: (1, monomial(4, u=1, rate=2), Aggregation.CONSTANT_UNIT, False),
    }
    if example_id not in table:
        raise UnknownExample(f"no test problem {example_id!r}; expected 1..6")
    k, init, agg, radius = table[example_id]
    return ProblemSpec(k, init, agg, radius, name=f"example{example_id}")


def closed_form_term(example_id: int, m: int) -> Expr:
    """General component ``c_m`` of the breakage test cases 1..4 in closed form.

    1: (-t)^m u^(m-2) e^-u / m! (u^2 - 2mu + m(m-1))
    2: (-t)^m u^(2m-2) e^-u / m! (u^2 - 2mu - 2m)
    3: delta (-ut)^m/m! + 2t theta (-ut)^(m-1)/(m-1)! + (-ut)^(m-2)/(m-2)! t^2 (r-u) theta
    4: delta (-u^2 t)^m/m! + 2rt theta (-u^2 t)^(m-1)/(m-1)!

    Summands whose factorial argument is negative are absent.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    sign = -1 if m % 2 else 1
    f = Fraction(sign, factorial(m))
    T = alg.Term
    if example_id == 1:
        terms = [T(f, m, m, 0, 1), T(-2 * m * f, m, m - 1, 0, 1) if m >= 1 else None,
                 T(m * (m - 1) * f, m, m - 2, 0, 1) if m >= 2 else None]
    elif example_id == 2:
        terms = [T(f, m, 2 * m, 0, 1), T(-2 * m * f, m, 2 * m - 1, 0, 1) if m >= 1 else None,
                 T(-2 * m * f, m, 2 * m - 2, 0, 1) if m >= 1 else None]
    elif example_id == 3:
        terms = [T(f, m, m, 0, 0, DIRAC)]
        if m >= 1:
            g = Fraction(-sign, factorial(m - 1))  # (-1)^(m-1)/(m-1)!
            terms.append(T(2 * g, m, m - 1, 0, 0, THETA))
        if m >= 2:
            h = Fraction(sign, factorial(m - 2))  # (-1)^(m-2)/(m-2)!
            terms += [T(h, m, m - 2, 1, 0, THETA), T(-h, m, m - 1, 0, 0, THETA)]
    elif example_id == 4:
        terms = [T(f, m, 2 * m, 0, 0, DIRAC)]
        if m >= 1:
            g = Fraction(-sign, factorial(m - 1))
            terms.append(T(2 * g, m, 2 * m - 2, 1, 0, THETA))
    else:
        raise UnknownExample(f"no closed form for example {example_id!r}; expected 1..4")
    return alg.normalize(t for t in terms if t is not None)
