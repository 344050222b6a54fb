"""Error of truncated series against exact densities, for two selection rates.

Run: python3 demos/error_tables.py
"""
import dataclasses

from pbe_djm import reports

# Same layout as the CSV report: rows are times, columns are truncation orders.
for example, times in ((1, (0.4, 0.8, 1.2, 1.6)), (2, (0.01, 0.04, 0.07, 0.1))):
    cfg = dataclasses.replace(reports.canonical_config(example), n_terms=(10, 15, 20, 25), t_values=times)
    smooth, _ = reports.error_grid(cfg)
    print(f"\nexample {example}: sup over u in [{cfg.u_min}, {cfg.u_max}] of |Phi_n - exact|")
    print("   t    " + "".join(f"{'n=' + str(n):>12}" for n in cfg.n_terms))
    for t, row in zip(times, smooth):
        print(f"  {t:<5}" + "".join(f"{e:12.3e}" for e in row))

# Quadratic selection grows the polynomial degree twice as fast, so the usable
# time window shrinks: note the time scale of the second table.
# For S(v) = v the series in t has unit radius of convergence near u ~ 1,
# which is why the t = 1.6 row stops improving with n.
