"""Recover the classical Hardy constant 2 from below with the oracle.

With u = b = 1 the supremal operator on nonincreasing functions is the
averaging operator, and measuring its output in L^2 gives the classical
Hardy inequality, whose best constant is p' = 2.
"""

from iterhardy import oracle as orc
from iterhardy.characterizations import ProblemSpec
from iterhardy.numgrid import Exponents, make_grid

grid = make_grid(1e-6, 1e6, 1024)
spec = ProblemSpec("thm61", Exponents(2, 2), grid=grid, cone="nonincreasing", target="lebesgue")
ev = orc.RatioEvaluator(spec)

t = grid.nodes
for delta in (0.2, 0.05, 0.01):
    f = (t <= 1) * t ** (-0.5 + delta)
    print(f"f = t^(-1/2+{delta}) chi(0,1): ratio {ev(f):.4f}")

res = orc.run_oracle(spec)
print(f"best seeded and refined candidate ({res.best.kind}): {res.best.ratio:.4f}")
print("ascent history:", " ".join(f"{r:.4f}" for r in res.history))
