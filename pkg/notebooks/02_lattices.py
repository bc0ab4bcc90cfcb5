"""
Lattices behind the sums
========================

Both moment sums run over integer points of an affine lattice.  Its
covolume enters the constant of the asymptotic formula.
"""

from liftmatch.graph import k4, banana, build_matrices
from liftmatch.lattice import (first_moment_lattice, second_moment_lattice, perp_lattice_volume,
                               second_moment_constraints, quotient_order)

for G in (k4(), banana(3)):
    rep = first_moment_lattice(G)
    print(G.name, "edge-flow lattice: rank", rep.lattice.rank, " vol^2", rep.lattice.vol_squared)
    print("  basis:", rep.lattice.basis)

# the covolume of the orthogonal lattice is Vol(L0) / q where q counts the
# extra integer points in the span of the constraint rows
rows = build_matrices(k4()).Ahat.tolist()
dual = perp_lattice_volume(rows)
print("\nK4 incidence rows: q =", dual.q, " Vol(L0)^2 =", dual.vol0_squared,
      " Vol(perp)^2 =", dual.perp_lattice.vol_squared)

# the pair lattice for the second moment lives in 36 dimensions for K4
rep2 = second_moment_lattice(k4())
print("\nK4 pair lattice: rank", rep2.lattice.rank, " vol^2", rep2.lattice.vol_squared,
      " closed form agrees:", rep2.closed_form_matches)
print("quotient order of the", len(second_moment_constraints(k4())), "constraints:",
      quotient_order(second_moment_constraints(k4())))
