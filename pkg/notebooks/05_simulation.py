"""
Simulating random lifts
=======================

Draw lifts of K4, count perfect matchings and short cycles exactly, and set
the averages against the formulas.
"""

from liftmatch.graph import k4
from liftmatch.first_moment import exact_first_moment
from liftmatch.lifts import monte_carlo_moments, compare_with_limit
from liftmatch.nbwalks import cycle_series, sample_limit_W

G = k4()
n = 12
cs = cycle_series(G, 20)
lam = dict(zip(cs.ks, cs.lam))
mu = dict(zip(cs.ks, cs.mu))

rep = monte_carlo_moments(G, n, trials=300, kmax=5, seed=2024, lam=lam, mu=mu)
EX = float(exact_first_moment(G, n))
print(f"E[X]: sample {rep.EX.value:.4g} +- {rep.EX.se:.2g}, exact {EX:.4g}")
for k in (3, 4, 5):
    print(f"k={k}  mean Z = {rep.EZ[k].value:.3f} (lambda {lam[k]:g})"
          f"  E[X Z]/E[X] = {rep.XZ_ratio[k].value:.3f} (mu {mu[k]:.4g})")

# loose check of X / E[X] against the limit variable W
print(compare_with_limit(rep.X, EX, sample_limit_W(cs, 100_000, seed=1)))

# the per-trial table is ready for plotting elsewhere
print(rep.to_csv().splitlines()[:3])
