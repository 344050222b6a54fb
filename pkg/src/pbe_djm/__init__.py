"""Series solutions of breakage and aggregation-breakage equations.

Modules
-------
algebra   exact exponential-polynomial term algebra
engine    Daftardar-Jafari recursion, test problems and closed-form terms
exact     exact solutions of the pure-breakage problems
oracle    grid solver used as an independent reference
reports   case configuration files and CSV reports (``cli`` wraps them)
"""
from .algebra import (DIRAC, ONE, THETA, Dist, Expr, Term, TPoly, add, convolve, evaluate,
                      evaluate_grid, monomial, mul_tpoly, normalize, scale, shift_u_power,
                      tail_integral, time_antiderivative, total_moment)
from .engine import (Aggregation, ProblemSpec, SeriesSolution, aggregation_G, breakage_rhs,
                     closed_form_term, compute_series, example_spec, next_component)
from .errors import PBEError
from .exact import ExactCase, eval_exact, exact_moment
from .oracle import GridState, advance, init_grid

__version__ = "0.1.0"
