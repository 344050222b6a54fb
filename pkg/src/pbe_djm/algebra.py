"""Exact arithmetic on exponential-polynomial-distributional expressions.

An :class:`Expr` is a finite sum of monomials

    coeff * t**a * u**b * r**c * exp(-lam*u) * D,   D in {1, delta(u-r), theta(r-u)}

with rational ``coeff`` and ``lam``.  This class is closed under every
operation the series recursion needs (tail integrals with the binary
breakage kernel, the death terms, constant-kernel convolution, moments and
time antiderivatives), so all iterates are represented without rounding.

Representation
--------------
Internally an ``Expr`` is a dict ``key -> coeff`` where

    key = (dist, exp_rate, t_pow, u_pow, r_pow)

Keys are unique, coefficients are nonzero ``Fraction`` values, and
``u * delta(u-r)`` is always sifted to ``r * delta(u-r)`` so Dirac terms
carry ``u_pow == 0``.  Floating point appears only in :func:`evaluate` and
:func:`evaluate_grid`, after the polynomial part has been summed exactly.
"""
from __future__ import annotations

import math
from enum import IntEnum
from fractions import Fraction
from typing import Dict, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import DivergentMoment, DivergentTail, MissingRadius, MixedRates, UnsupportedClass

Rational = Fraction


class Dist(IntEnum):
    """Distributional factor of a term."""

    ONE = 0
    DIRAC = 1  # delta(u - r)
    THETA = 2  # theta(r - u)


ONE, DIRAC, THETA = Dist.ONE, Dist.DIRAC, Dist.THETA

Key = Tuple[Dist, Fraction, int, int, int]


class Term(NamedTuple):
    coeff: Fraction
    t_pow: int = 0
    u_pow: int = 0
    r_pow: int = 0
    exp_rate: Fraction = Fraction(0)
    dist: Dist = ONE

    @property
    def key(self) -> Key:
        return (self.dist, self.exp_rate, self.t_pow, self.u_pow, self.r_pow)


def _acc(out: Dict[Key, Fraction], key: Key, value: Fraction) -> None:
    s = out.get(key, 0) + value
    if s:
        out[key] = s
    else:
        out.pop(key, None)


class Expr:
    """Immutable, canonical sum of :class:`Term` objects.

    Build one with :func:`normalize` (or ``Expr(terms)``, which calls it),
    or with the :func:`monomial` helper::

        >>> e = monomial(1, rate=1) - monomial(1, t=1, u=1, rate=1)
        >>> len(e)
        2
    """

    __slots__ = ("_coeffs", "_terms", "_hash")

    def __init__(self, terms: Iterable[Term] = ()):
        out: Dict[Key, Fraction] = {}
        for term in terms:
            coeff = Fraction(term.coeff)
            if not coeff:
                continue
            dist = Dist(term.dist)
            rate = Fraction(term.exp_rate)
            t_pow, u_pow, r_pow = int(term.t_pow), int(term.u_pow), int(term.r_pow)
            if min(t_pow, u_pow, r_pow) < 0:
                raise ValueError(f"negative power in term {term!r}")
            if rate < 0:
                raise ValueError(f"negative exponential rate in term {term!r}")
            if dist is DIRAC:
                r_pow += u_pow
                u_pow = 0
            _acc(out, (dist, rate, t_pow, u_pow, r_pow), coeff)
        self._coeffs = out
        self._terms = None
        self._hash = None

    @classmethod
    def _from_dict(cls, coeffs: Dict[Key, Fraction]) -> "Expr":
        # caller guarantees canonical keys and nonzero coefficients
        obj = cls.__new__(cls)
        obj._coeffs = coeffs
        obj._terms = None
        obj._hash = None
        return obj

    @property
    def terms(self) -> Tuple[Term, ...]:
        if self._terms is None:
            self._terms = tuple(
                Term(c, k[2], k[3], k[4], k[1], k[0]) for k, c in sorted(self._coeffs.items())
            )
        return self._terms

    def items(self):
        """Iterate ``(key, coeff)`` pairs in canonical order."""
        return ((t.key, t.coeff) for t in self.terms)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._coeffs.items()))
        return self._hash

    def __add__(self, other: "Expr") -> "Expr":
        if not isinstance(other, Expr):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other: "Expr") -> "Expr":
        if not isinstance(other, Expr):
            return NotImplemented
        return add(self, scale(other, -1))

    def __neg__(self) -> "Expr":
        return scale(self, -1)

    def __mul__(self, s) -> "Expr":
        if isinstance(s, TPoly):
            return mul_tpoly(self, s)
        if isinstance(s, (int, Fraction)):
            return scale(self, s)
        return NotImplemented

    __rmul__ = __mul__

    @property
    def rates(self) -> frozenset:
        return frozenset(k[1] for k in self._coeffs)

    @property
    def is_smooth(self) -> bool:
        """True when no term carries a Dirac or step factor."""
        return all(k[0] is ONE for k in self._coeffs)

    @property
    def references_r(self) -> bool:
        return any(k[0] is not ONE or k[4] for k in self._coeffs)

    @property
    def max_t_pow(self) -> int:
        return max((k[2] for k in self._coeffs), default=0)

    def __repr__(self) -> str:
        return f"Expr({self})"

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for t in self.terms:
            factors = [str(t.coeff)]
            for name, p in (("t", t.t_pow), ("u", t.u_pow), ("r", t.r_pow)):
                if p == 1:
                    factors.append(name)
                elif p:
                    factors.append(f"{name}^{p}")
            if t.exp_rate:
                factors.append(f"exp(-{t.exp_rate}*u)")
            if t.dist is DIRAC:
                factors.append("delta(u-r)")
            elif t.dist is THETA:
                factors.append("theta(r-u)")
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


def monomial(coeff=1, t: int = 0, u: int = 0, r: int = 0, rate=0, dist: Dist = ONE) -> Expr:
    """Single-term expression ``coeff * t^t * u^u * r^r * exp(-rate*u) * dist``."""
    return Expr([Term(Fraction(coeff), t, u, r, Fraction(rate), dist)])


ZERO = Expr()


class TPoly(Mapping):
    """Exact polynomial in ``t`` and ``r``, keyed by ``(t_pow, r_pow)``.

    Used for moments of an :class:`Expr`.  Zero coefficients are never stored,
    so ``not p`` tests for the zero polynomial.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[Mapping[Tuple[int, int], object]] = None):
        self._c: Dict[Tuple[int, int], Fraction] = {}
        for key, value in (coeffs or {}).items():
            value = Fraction(value)
            if value:
                self._c[(int(key[0]), int(key[1]))] = value

    def __getitem__(self, key):
        return self._c[key]

    def __iter__(self):
        return iter(sorted(self._c))

    def __len__(self):
        return len(self._c)

    def __eq__(self, other):
        if isinstance(other, TPoly):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == TPoly({(0, 0): other})._c
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __add__(self, other: "TPoly") -> "TPoly":
        out = dict(self._c)
        for k, v in other._c.items():
            _acc(out, k, v)
        return TPoly(out)

    def __neg__(self) -> "TPoly":
        return TPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other: "TPoly") -> "TPoly":
        return self + (-other)

    def __mul__(self, other) -> "TPoly":
        if isinstance(other, (int, Fraction)):
            return TPoly({k: v * other for k, v in self._c.items()})
        out: Dict[Tuple[int, int], Fraction] = {}
        for (a1, c1), v1 in self._c.items():
            for (a2, c2), v2 in other._c.items():
                _acc(out, (a1 + a2, c1 + c2), v1 * v2)
        return TPoly(out)

    __rmul__ = __mul__

    def evaluate(self, t, r=None):
        """Exact value at ``t`` (and ``r``); returns a ``Fraction``."""
        t = as_rational(t)
        if r is None:
            if any(k[1] for k in self._c):
                raise MissingRadius("polynomial depends on r but no radius was given")
            r = 0
        r = as_rational(r)
        return sum((v * t ** a * r ** c for (a, c), v in self._c.items()), Fraction(0))

    def __repr__(self):
        return f"TPoly({dict(sorted(self._c.items()))})"

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for (a, c), v in sorted(self._c.items()):
            factors = [str(v)] if v != 1 or not (a or c) else []
            factors += [f"{n}^{p}" if p > 1 else n for n, p in (("t", a), ("r", c)) if p]
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


def normalize(raw_terms: Iterable[Term]) -> Expr:
    """Canonical form of a term list: sifted, merged, zero-free, sorted."""
    return Expr(raw_terms)


def add(a: Expr, b: Expr) -> Expr:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a._coeffs)
    for k, v in b._coeffs.items():
        _acc(out, k, v)
    return Expr._from_dict(out)


def sum_exprs(exprs: Iterable[Expr]) -> Expr:
    out: Dict[Key, Fraction] = {}
    for e in exprs:
        for k, v in e._coeffs.items():
            _acc(out, k, v)
    return Expr._from_dict(out)


def scale(a: Expr, s) -> Expr:
    s = Fraction(s)
    if not s:
        return ZERO
    return Expr._from_dict({k: v * s for k, v in a._coeffs.items()})


def mul_tpoly(a: Expr, p: Mapping[Tuple[int, int], object]) -> Expr:
    """Multiply ``a`` by a polynomial in ``t`` and ``r``."""
    p = p if isinstance(p, TPoly) else TPoly(p)
    out: Dict[Key, Fraction] = {}
    for (dist, lam, tp, up, rp), c in a._coeffs.items():
        for (pt, pr), pc in p._c.items():
            _acc(out, (dist, lam, tp + pt, up, rp + pr), c * pc)
    return Expr._from_dict(out)


def shift_u_power(a: Expr, k: int) -> Expr:
    """Multiply by ``u**k``; Dirac terms pick up ``r**k`` instead."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = {}
    for (dist, lam, tp, up, rp), c in a._coeffs.items():
        if dist is DIRAC:
            out[(dist, lam, tp, up, rp + k)] = c
        else:
            out[(dist, lam, tp, up + k, rp)] = c
    return Expr._from_dict(out)


def tail_integral(a: Expr, w: int) -> Expr:
    """Return ``int_u^inf v**w * a(t, v) dv`` as an expression in ``u``.

    Raises
    ------
    DivergentTail
        A smooth term has no exponential decay.
    UnsupportedClass
        A Dirac or step term carries an exponential factor; the result would
        involve ``exp(-lam*r)``, which the class cannot hold.
    """
    out: Dict[Key, Fraction] = {}
    for (dist, lam, tp, up, rp), c in a._coeffs.items():
        n = up + w
        if dist is ONE:
            if not lam:
                raise DivergentTail(f"tail of u^{n} diverges without exponential decay")
            # int_u^inf v^n e^{-lam v} dv = e^{-lam u} sum_j n!/j! u^j / lam^(n-j+1)
            ratio = Fraction(1)  # n!/j! for j = n, n-1, ...
            inv = 1 / lam
            lam_pow = inv  # 1/lam^(n-j+1)
            for j in range(n, -1, -1):
                _acc(out, (ONE, lam, tp, j, rp), c * ratio * lam_pow)
                ratio *= j
                lam_pow *= inv
        elif lam:
            raise UnsupportedClass("distributional term with exponential factor in tail integral")
        elif dist is DIRAC:
            _acc(out, (THETA, lam, tp, 0, rp + w), c)
        else:
            # int_u^r v^n dv = (r^(n+1) - u^(n+1)) / (n+1)
            q = c / (n + 1)
            _acc(out, (THETA, lam, tp, 0, rp + n + 1), q)
            _acc(out, (THETA, lam, tp, n + 1, rp), -q)
    return Expr._from_dict(out)


def convolve(a: Expr, b: Expr) -> Expr:
    """Return ``int_0^u a(t, v) * b(t, u - v) dv``.

    Both operands must be smooth and share one exponential rate; then
    ``int_0^u v^p (u-v)^q dv = p! q! / (p+q+1)! * u^(p+q+1)`` keeps the result
    in the class.
    """
    if not a or not b:
        return ZERO
    if not (a.is_smooth and b.is_smooth):
        raise UnsupportedClass("convolution is defined for smooth terms only")
    rates = a.rates | b.rates
    if len(rates) > 1:
        raise MixedRates(f"convolution needs a single exponential rate, got {sorted(rates)}")
    (lam,) = rates
    fa = [(tp, up, rp, c * math.factorial(up)) for (_, _, tp, up, rp), c in a._coeffs.items()]
    fb = [(tp, up, rp, c * math.factorial(up)) for (_, _, tp, up, rp), c in b._coeffs.items()]
    acc: Dict[Tuple[int, int, int], Fraction] = {}
    for tp1, up1, rp1, c1 in fa:
        for tp2, up2, rp2, c2 in fb:
            key = (tp1 + tp2, up1 + up2 + 1, rp1 + rp2)
            acc[key] = acc.get(key, 0) + c1 * c2
    out = {}
    for (tp, up, rp), s in acc.items():
        if s:
            out[(ONE, lam, tp, up, rp)] = s / math.factorial(up)
    return Expr._from_dict(out)


def total_moment(a: Expr, j: int) -> TPoly:
    """``mu_j(t) = int_0^inf u**j a(t, u) du`` as a polynomial in ``t`` and ``r``."""
    out: Dict[Tuple[int, int], Fraction] = {}
    for (dist, lam, tp, up, rp), c in a._coeffs.items():
        n = up + j
        if dist is ONE:
            if not lam:
                raise DivergentMoment(f"moment of u^{n} diverges without exponential decay")
            _acc(out, (tp, rp), c * math.factorial(n) / lam ** (n + 1))
        elif lam:
            raise UnsupportedClass("moment of a distributional term with exponential factor")
        elif dist is DIRAC:
            _acc(out, (tp, rp + j), c)
        else:
            _acc(out, (tp, rp + n + 1), c / (n + 1))
    return TPoly(out)


def time_antiderivative(a: Expr) -> Expr:
    """``int_0^t a(s, u) ds`` (zero constant of integration)."""
    return Expr._from_dict(
        {(d, lam, tp + 1, up, rp): c / (tp + 1) for (d, lam, tp, up, rp), c in a._coeffs.items()}
    )


def dirac_part(a: Expr) -> Expr:
    """Terms carrying ``delta(u-r)``."""
    return Expr._from_dict({k: c for k, c in a._coeffs.items() if k[0] is DIRAC})


def dirac_coefficient(a: Expr) -> TPoly:
    """Coefficient of ``delta(u-r)`` as a ``TPoly``; requires rate-free Dirac terms."""
    out = {}
    for (dist, lam, tp, up, rp), c in a._coeffs.items():
        if dist is DIRAC:
            if lam:
                raise UnsupportedClass("Dirac coefficient with exponential factor is not a TPoly")
            _acc(out, (tp, rp), c)
    return TPoly(out)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def _collapse(a: Expr, t: Fraction, r: Optional[Fraction]):
    """Substitute t and r exactly; return u-polynomials grouped by (dist, rate)."""
    if r is None and a.references_r:
        raise MissingRadius("expression references r but no radius was given")
    t_pows: Dict[int, Fraction] = {}
    r_pows: Dict[int, Fraction] = {}
    groups: Dict[Tuple[Dist, Fraction], Dict[int, Fraction]] = {}
    for (dist, lam, tp, up, rp), c in a._coeffs.items():
        if tp not in t_pows:
            t_pows[tp] = t ** tp
        if rp and rp not in r_pows:
            r_pows[rp] = r ** rp
        v = c * t_pows[tp]
        if rp:
            v *= r_pows[rp]
        poly = groups.setdefault((dist, lam), {})
        poly[up] = poly.get(up, 0) + v
    return groups


def _poly_value(poly: Dict[int, Fraction], u: Fraction) -> Fraction:
    """Exact value of ``sum_b poly[b] u^b`` via integer Horner."""
    if not poly:
        return Fraction(0)
    deg = max(poly)
    den = 1
    for c in poly.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    p, q = u.numerator, u.denominator
    acc = 0
    q_pow = 1
    # homogeneous Horner: sum_b A_b p^b q^(deg-b)
    for b in range(deg, -1, -1):
        c = poly.get(b)
        a_b = (c.numerator * (den // c.denominator)) if c else 0
        acc = acc * p + a_b * q_pow
        q_pow *= q
    return Fraction(acc, den * q ** deg)


def as_rational(x) -> Fraction:
    """Exact rational for ``x``; floats are read through their shortest repr.

    ``as_rational(0.1) == Fraction(1, 10)``, whereas ``Fraction(0.1)`` is the
    binary double nearest to 0.1.  The decimal reading keeps denominators
    small, which matters when a 100-term series is evaluated exactly.
    """
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"cannot evaluate at {x!r}")
        return Fraction(repr(float(x)))
    return Fraction(x)


def _theta(r: Fraction, u: Fraction) -> int:
    # theta(r - u) = 1 iff u < r
    return 1 if u < r else 0


def evaluate(a: Expr, t, u, r=None) -> Tuple[float, float]:
    """Pointwise value of ``a`` at ``(t, u)``.

    Returns ``(smooth_value, dirac_coefficient)``.  The smooth part includes
    step terms; Dirac terms are never point-evaluated, their total
    coefficient (a function of ``t`` and ``r``) is returned instead.
    """
    values, dirac = evaluate_grid(a, t, [u], r)
    return float(values[0]), dirac


def evaluate_grid(a: Expr, t, us: Sequence, r=None) -> Tuple[np.ndarray, float]:
    """Vectorised :func:`evaluate` over a sequence of ``u`` values."""
    t = as_rational(t)
    r = None if r is None else as_rational(r)
    groups = _collapse(a, t, r)
    us_exact = [as_rational(x) for x in us]
    out = np.zeros(len(us_exact))
    dirac = 0.0
    for (dist, lam), poly in sorted(groups.items()):
        poly = {b: c for b, c in poly.items() if c}
        if not poly:
            continue
        if dist is DIRAC:
            dirac += float(poly.get(0, 0)) * math.exp(-float(lam * r))
            continue
        for i, u in enumerate(us_exact):
            if dist is THETA and not _theta(r, u):
                continue
            out[i] += float(_poly_value(poly, u)) * math.exp(-float(lam * u))
    return out, dirac
