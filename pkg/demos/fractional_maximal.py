"""The fractional maximal estimate behind the thm71 evaluator.

The rearranged estimate sup_{tau > t} tau^{gamma/n - 1} int_0^tau f* is
computed for f* = chi(0,1), where it equals min(1, t^{-1/2}) for
gamma/n = 1/2, then the characterization is evaluated for a power pair.
Here the limit term R5, read at t_max, dominates; the truncation delta
shows how much it moves when t_max grows tenfold.
"""

import numpy as np

from iterhardy import weightlang as wl
from iterhardy.characterizations import thm71
from iterhardy.numgrid import make_grid
from iterhardy.operators import frac_max_rearranged

grid = make_grid(1e-4, 1e4, 512)
est = frac_max_rearranged(wl.sample("chi(0,1)", grid), 0.5)
exact = np.minimum(1.0, grid.nodes ** -0.5)
print(f"max relative error against min(1, t^-1/2): {np.max(np.abs(est.values / exact - 1)):.2e}")

rep = thm71(2.0, 3.0, 0.5, "chi(0,1)", "chi(1,10)", grid)
print(f"thm71 p=2 q=3 gamma/n=1/2: total {rep.total:.5g}, truncation delta {rep.truncation_delta:.2e}")
for term in rep.terms:
    print(f"    {term.name:>3} {term.value:.5g}")
for note in rep.notes + rep.warnings:
    print("    note:", note)
