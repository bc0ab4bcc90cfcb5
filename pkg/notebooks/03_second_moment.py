"""
Second moment and the conditioning constant
===========================================

E[X^2] / E[X]^2 does not tend to 1, so Chebyshev alone says little.  The
excess is explained exactly by short cycles.
"""

import math

from liftmatch.graph import k4, banana
from liftmatch.first_moment import asymptotic_first_moment
from liftmatch.second_moment import asymptotic_second_moment, exact_second_moment, verify_phi2_maximizer
from liftmatch.nbwalks import ssc_constant, a4_check

G = k4()
rep = verify_phi2_maximizer(G, multistart=30)
print("maximizer is the uniform point 1/9:", rep.x0_error < 1e-9, " status:", rep.status)

est2 = asymptotic_second_moment(G).estimate
print("det(-H) on the lattice span:", est2.det_neg_H_restricted)
print("second-moment constant:", est2.C)

# exact sums over the pair lattice grow fast; n = 3 already needs ~3e8 points
for n in (1, 2):
    print(f"n={n}  E[X^2] = {exact_second_moment(G, n)}")

# compare the ratio of constants with exp(sum lambda_k delta_k^2)
est1 = asymptotic_first_moment(G).estimate
print("\nC2 / C1^2        =", est2.C / est1.C**2)
print("cycle constant    =", ssc_constant(G).value)

# both graphs pass the check
for H in (k4(), banana(3)):
    r = a4_check(H)
    print(H.name, "pass" if r.passed else "fail", f"(rel diff {r.relative_difference:.1e})")
