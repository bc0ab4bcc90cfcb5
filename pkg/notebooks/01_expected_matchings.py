"""
Expected perfect matchings in a random lift
===========================================

A random n-lift of K4 has 4n vertices and is 3-regular.  We compute the
exact expectation of the number of perfect matchings and watch it approach
the asymptotic formula.
"""

from liftmatch.graph import k4, banana
from liftmatch.first_moment import (exact_first_moment, asymptotic_first_moment,
                                    ratio_to_estimate)

G = k4()
fm = asymptotic_first_moment(G)
est = fm.estimate
print("C =", est.C, " n-power =", est.p_total, " rate =", est.exp_rate)

# the exact value is a finite sum over edge-count vectors; the ratio to the
# estimate should drift towards 1 roughly like 1/n
for n in (3, 6, 12, 24, 48):
    exact = exact_first_moment(G, n)
    print(f"n={n:3d}  E[X] = {float(exact):.6e}  ratio = {ratio_to_estimate(exact, est, n):.6f}")

# the two-vertex graph with three parallel edges is bipartite, which adds a
# factor sqrt(pi n) to the growth
B = banana(3)
eb = asymptotic_first_moment(B).estimate
print("\nK2^3: C =", eb.C, " n-power =", eb.p_total)
for n in (3, 6, 12, 24, 48):
    exact = exact_first_moment(B, n)
    print(f"n={n:3d}  ratio = {ratio_to_estimate(exact, eb, n):.6f}")
