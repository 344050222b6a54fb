"""Series solution of pure breakage, built term by term and checked against the exact density.

Run: python3 demos/breakage_series.py
"""
from fractions import Fraction

import numpy as np

from pbe_djm import algebra as alg
from pbe_djm.engine import compute_series, example_spec
from pbe_djm.exact import ExactCase, eval_exact

# Linear selection S(v) = v, binary uniform daughters, exponential start.
spec = example_spec(1)
series = compute_series(spec, 6)

print("First components, exact rational coefficients:")
for m, c in enumerate(series.components[:4]):
    print(f"  c_{m} = {c}")

# Every component carries zero volume, so the partial sums conserve mass exactly.
print("\nfirst moment of each component:", [str(alg.total_moment(c, 1)) for c in series.components])

# Partial sums close in on (1 + t)^2 exp(-u (1 + t)) as more terms are added.
us = np.arange(1, 1001) / 100
t = 0.8
exact_vals, _ = eval_exact(ExactCase(1), t, us)
longer = compute_series(spec, 40)
print(f"\nsup error over u in [0.01, 10] at t = {t}:")
for n in (5, 10, 20, 30, 40):
    vals, _ = alg.evaluate_grid(longer.phi(n), t, us)
    print(f"  n = {n:2d}   {np.max(np.abs(vals - exact_vals)):.3e}")

# A monodisperse start keeps a Dirac spike at u = r whose weight is a truncated exponential.
mono = compute_series(example_spec(3), 5)
print("\nmonodisperse start, spike weight of Phi_5:", alg.dirac_coefficient(mono.phi()))
print("value at t = 0.3, r = 1:", float(alg.dirac_coefficient(mono.phi()).evaluate(Fraction(3, 10), 1)),
      "vs exp(-0.3) =", np.exp(-0.3))
