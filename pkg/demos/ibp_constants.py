"""Integration by parts against powers of a cumulative weight.

On step data the two sides differ by exactly the factor alpha + 1; the
sums are carried out in rational arithmetic so the printed ratios are
exact up to one final rounding.
"""

from iterhardy.ibp import ibp_A, ibp_B, ibp_sweep, random_instance

for alpha in (0.5, 1.0, 2.0, 5.0):
    inst = random_instance(alpha, seed=0)
    a = ibp_A(inst)
    b = ibp_B(inst.reflected())
    print(f"alpha={alpha}: A1={a.A1:.6g} A2={a.A2:.6g} A1/A2={a.ratio:.15f} "
          f"1/(alpha+1)={1 / (alpha + 1):.15f}  reflected B1={b.B1:.6g}")

rows = ibp_sweep([0.5, 1.0, 2.0, 5.0], 100, seed=0)
print(f"{sum(r.passed for r in rows)}/{len(rows)} random instances within the constants")
