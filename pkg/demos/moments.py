"""Number, volume and second moment of the series, exactly as polynomials in t.

Run: python3 demos/moments.py
"""
from pbe_djm import algebra as alg
from pbe_djm.engine import compute_series, example_spec
from pbe_djm.exact import ExactCase, exact_moment

phi = compute_series(example_spec(1), 30).phi()
for j in range(3):
    print(f"mu_{j}(t) of Phi_30: {str(alg.total_moment(phi, j))[:70]}")

print("\n  t     mu0 series   mu0 exact   mu2 series   mu2 exact")
moments = [alg.total_moment(phi, j) for j in (0, 2)]
for t in (0.2, 0.5, 0.9):
    mu0, mu2 = (float(p.evaluate(t)) for p in moments)
    print(f"  {t:<4} {mu0:12.8f} {exact_moment(ExactCase(1), 0, t):11.8f} "
          f"{mu2:12.8f} {exact_moment(ExactCase(1), 2, t):11.8f}")

# mu_2 = 2/(1 + t) is an alternating geometric series in t; at t = 0.9 thirty terms
# still leave a visible gap, while mu_0 and mu_1 are exact polynomials already.

# With aggregation the particle count is no longer linear in t but volume still is constant.
agg = compute_series(example_spec(5), 5).phi()
print("\naggregation + breakage, mu_1 of Phi_5:", alg.total_moment(agg, 1))
print("mu_0 of Phi_5, leading terms:", str(alg.total_moment(agg, 0))[:60], "...")
