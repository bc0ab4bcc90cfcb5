"""
Short cycles and the limit law
==============================

Cycle counts in the lift are asymptotically Poisson with means w_k / 2k,
where w_k counts closed non-backtracking walks in the base graph.
"""

import numpy as np

from liftmatch.graph import k4, petersen
from liftmatch.nbwalks import cycle_series, nb_eigenvalues, sample_limit_W

cs = cycle_series(k4(), kmax=8)
for row in cs.rows():
    print(row)

# the walk counts come from the spectrum of the non-backtracking matrix
print("\nnon-backtracking spectrum of K4:")
print(np.round(sorted(nb_eigenvalues(k4()), key=lambda z: (z.real, z.imag)), 4))

# Petersen has girth 5, so the first nonzero mean is at k = 5
print("\nPetersen lambda_k:", cycle_series(petersen(), 8).lam)

# samples of the limit variable W have mean 1 and are strictly positive
W = sample_limit_W(cycle_series(k4(), 20), 100_000, seed=1)
print("\nW: mean %.4f  sd %.4f  min %.4f" % (W.mean(), W.std(), W.min()))
