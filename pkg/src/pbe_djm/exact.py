"""Exact solutions of the four pure-breakage test problems.

Examples 3 and 4 start from monodisperse particles ``delta(u - r)``; their
solutions have a Dirac part and a smooth part supported on ``u < r``.  Both
evaluators here return the two channels separately, as
``(smooth_value, dirac_coefficient)``.

Note on example 1: the solution of ``S = u``, ``B = 2/v``, ``c0 = e^-u`` is
``(1 + t)**2 * exp(-u (1 + t))``.  The commonly quoted form with
``(1 + t**2)`` does not conserve volume, so it is kept only as
:func:`example1_misprint` for comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaincc

from .errors import QuadratureFailure, UnknownExample

QUAD_TOL = 1e-12


@dataclass(frozen=True)
class ExactCase:
    example_id: int
    r: Optional[float] = None

    def __post_init__(self):
        if self.example_id not in (1, 2, 3, 4):
            raise UnknownExample(f"no exact solution for example {self.example_id!r}")
        if (self.r is not None) != (self.example_id in (3, 4)):
            raise ValueError("radius r is required for examples 3-4 and only for them")
        if self.r is not None and self.r <= 0:
            raise ValueError("radius must be positive")


def _smooth(case: ExactCase, t: float, u):
    u = np.asarray(u, dtype=float)
    if case.example_id == 1:
        return (1 + t) ** 2 * np.exp(-u * (1 + t))
    if case.example_id == 2:
        return (1 + 2 * t + 2 * t * u) * np.exp(-u * (1 + t * u))
    r = case.r
    below = u < r
    if case.example_id == 3:
        return np.where(below, np.exp(-u * t) * (2 * t + t * t * (r - u)), 0.0)
    return np.where(below, 2 * r * t * np.exp(-u * u * t), 0.0)


def _dirac(case: ExactCase, t: float) -> float:
    if case.example_id == 3:
        return math.exp(-case.r * t)
    if case.example_id == 4:
        return math.exp(-case.r ** 2 * t)
    return 0.0


def eval_exact(case: ExactCase, t: float, u) -> Tuple[object, float]:
    """``(smooth_value, dirac_coefficient)`` of the exact solution.

    ``u`` may be a scalar or an array; the smooth part follows its shape.
    """
    smooth = _smooth(case, t, u)
    if np.ndim(smooth) == 0:
        smooth = float(smooth)
    return smooth, _dirac(case, t)


def example1_misprint(t: float, u):
    """``(1 + t^2) exp(-u (1 + t))``, the non-conservative printed limit."""
    return (1 + t * t) * np.exp(-np.asarray(u, dtype=float) * (1 + t))


def _tail_cutoff(case: ExactCase, t: float, j: int) -> float:
    """Upper limit beyond which the integrand's tail is below the tolerance."""
    # every smooth solution here is bounded by (1 + 2t + 2tu) e^{-u}
    def tail(U):
        # int_U^inf u^j (1 + 2t + 2tu) e^{-u} du, via the upper incomplete gamma
        g = lambda n: math.gamma(n + 1) * float(gammaincc(n + 1, U))
        return (1 + 2 * t) * g(j) + 2 * t * g(j + 1)

    U = 10.0
    while tail(U) > QUAD_TOL * 1e-1:
        U *= 1.5
    return U


def exact_moment(case: ExactCase, j: int, t: float) -> float:
    """``int_0^inf u^j c(t, u) du`` of the exact solution.

    Example 1 uses closed forms; the others integrate the smooth part with
    adaptive Gauss-Kronrod quadrature and add ``r^j`` times the Dirac weight.
    """
    if j < 0:
        raise ValueError("moment order must be nonnegative")
    if case.example_id == 1:
        # moments of (1+t)^2 e^{-u(1+t)}: j! (1+t)^(1-j)
        return math.factorial(j) * (1 + t) ** (1 - j)
    upper = _tail_cutoff(case, t, j) if case.example_id == 2 else case.r
    f = lambda x: x ** j * float(_smooth(case, t, x))
    value, err = integrate.quad(f, 0.0, upper, epsabs=QUAD_TOL, epsrel=1e-13,
                                limit=500)
    if not err <= QUAD_TOL * 10:
        raise QuadratureFailure(f"moment {j} at t={t}: error estimate {err:.3g}")
    if case.example_id in (3, 4):
        value += case.r ** j * _dirac(case, t)
    return value
