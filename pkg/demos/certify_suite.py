"""Compare closed-form characterizations with brute-force lower bounds.

For each problem the characterization total (largest term) and the oracle's
lower bound on the best constant are printed with their ratio. The theory
says the ratio stays between two constants that depend only on p and q.
"""

from iterhardy import oracle as orc
from iterhardy.characterizations import ProblemSpec
from iterhardy.numgrid import Exponents, make_grid

grid = make_grid(1e-4, 1e4, 512)
problems = [
    ("thm41", "1", "t^-0.5", "min(t^0.5,t^-3)", 1.5, 1.5),
    ("thm51", "1", "1", "chi(1,2)", 4, 2),
    ("thm61", "t^0.5", "1", "min(t^-0.5,t^-3)", 1.5, 1.5),
    ("thm61", "1", "t^-0.5", "chi(1,2)", 3, 2),
]

for th, u, v, w, p, q in problems:
    spec = ProblemSpec(th, Exponents(p, q), u=u, v=v, w=w, grid=grid, cone="nonincreasing")
    cert = orc.certify(spec, truncation=False)
    rep = cert.rhs
    print(f"{th} p={p} q={q} v={v} w={w} (case {rep.case})")
    for term in rep.terms:
        print(f"    {term.name:>3} {term.value:.5g}{'  [tMax read]' if term.boundary_read else ''}")
    print(f"    total {rep.total:.5g}  oracle {cert.lower:.5g}  band {cert.band:.4f}")
