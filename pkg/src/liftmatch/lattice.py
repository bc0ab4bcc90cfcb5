"""Exact integer lattice algebra.

Everything here runs on Python integers and :class:`fractions.Fraction`, so
there is no overflow and no rounding.  Volumes are always carried squared.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import Multigraph, build_matrices, is_bipartite

log = logging.getLogger(__name__)

IntMatrix = list[list[int]]


class LatticeError(ValueError):
    pass


def as_int_rows(M) -> IntMatrix:
    """Copy a matrix-like object into a list of rows of Python ints."""
    rows = []
    for row in M:
        out = []
        for v in row:
            if isinstance(v, Fraction):
                if v.denominator != 1:
                    raise LatticeError(f"non-integer entry {v}")
                v = v.numerator
            iv = int(v)
            if iv != v:
                raise LatticeError(f"non-integer entry {v}")
            out.append(iv)
        rows.append(out)
    return rows


def _transpose(rows: IntMatrix, ncols: int | None = None) -> IntMatrix:
    if not rows:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*rows)]


# -- elimination ------------------------------------------------------------

def _row_echelon(rows: IntMatrix, pivot_cols: int) -> int:
    """Unimodular row reduction in place; returns the number of pivots.

    Only the first ``pivot_cols`` columns are used for pivoting.  Pivots are
    taken at the leftmost nonzero column and made positive.
    """
    r = 0
    nrows = len(rows)
    for c in range(pivot_cols):
        if r == nrows:
            break
        while True:
            nz = [k for k in range(r, nrows) if rows[k][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda k: (abs(rows[k][c]), k))
            rows[r], rows[p] = rows[p], rows[r]
            piv = rows[r]
            clean = True
            for k in range(r + 1, nrows):
                a = rows[k][c]
                if a:
                    q = a // piv[c]
                    rows[k] = [x - q * y for x, y in zip(rows[k], piv)]
                    if rows[k][c]:
                        clean = False
            if clean:
                break
        if r < nrows and rows[r][c] != 0:
            if rows[r][c] < 0:
                rows[r] = [-x for x in rows[r]]
            r += 1
    return r


def hermite_normal_form(M) -> IntMatrix:
    """Row-style Hermite normal form of an integer matrix (zero rows dropped).

    Pivots are positive, sit at the leftmost nonzero column of each row, and
    the entries above each pivot are reduced into ``[0, pivot)``.  The result
    is a canonical basis of the row lattice.
    """
    rows = as_int_rows(M)
    if not rows:
        return []
    ncols = len(rows[0])
    r = _row_echelon(rows, ncols)
    rows = rows[:r]
    for k in range(r):
        c = next(j for j, v in enumerate(rows[k]) if v)
        piv = rows[k][c]
        for above in range(k):
            q = rows[above][c] // piv
            if q:
                rows[above] = [x - q * y for x, y in zip(rows[above], rows[k])]
    return rows


def smith_invariants(M) -> list[int]:
    """Nonzero invariant factors ``d_1 | d_2 | ...`` of an integer matrix."""
    A = as_int_rows(M)
    if not A or not A[0]:
        return []
    m, n = len(A), len(A[0])
    diag = []
    t = 0
    while t < min(m, n):
        entries = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not entries:
            break
        _, i0, j0 = min(entries)
        A[t], A[i0] = A[i0], A[t]
        for row in A:
            row[t], row[j0] = row[j0], row[t]
        while True:
            piv = A[t][t]
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // piv
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // piv
                    for row in A:
                        row[j] -= q * row[t]
                    if A[t][j]:
                        changed = True
            if changed:
                entries = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n)
                           if A[i][j] and (i == t or j == t)]
                _, i0, j0 = min(entries)
                A[t], A[i0] = A[i0], A[t]
                for row in A:
                    row[t], row[j0] = row[j0], row[t]
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % piv), None)
            if bad is None:
                break
            A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
        diag.append(abs(A[t][t]))
        t += 1
    # normalise divisibility chain
    for a in range(len(diag)):
        for b in range(a + 1, len(diag)):
            g = math.gcd(diag[a], diag[b])
            diag[a], diag[b] = g, diag[a] * diag[b] // g
    return diag


def bareiss_det(M) -> int:
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    A = as_int_rows(M)
    n = len(A)
    if n == 0:
        return 1
    if any(len(row) != n for row in A):
        raise LatticeError("determinant of a non-square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * A[n - 1][n - 1]


def gram_matrix(vectors) -> IntMatrix:
    V = as_int_rows(vectors)
    return [[sum(a * b for a, b in zip(u, v)) for v in V] for u in V]


def gram_determinant(vectors) -> int:
    """Determinant of the matrix of inner products; zero iff dependent."""
    V = as_int_rows(vectors)
    if V and len({len(v) for v in V}) != 1:
        raise LatticeError("vectors have different lengths")
    return bareiss_det(gram_matrix(V))


# -- lattices ---------------------------------------------------------------

@dataclass(frozen=True)
class ExactLattice:
    ambient_dim: int
    basis: tuple[tuple[int, ...], ...]
    gram_det: int
    vol_squared: Fraction

    @property
    def rank(self) -> int:
        return len(self.basis)

    def basis_array(self, dtype=float) -> np.ndarray:
        return np.array(self.basis, dtype=dtype).reshape(self.rank, self.ambient_dim)

    def to_dict(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "rank": self.rank,
            "vol_squared": fraction_str(self.vol_squared),
            "basis": [list(b) for b in self.basis],
        }


def fraction_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def lattice_from_basis(basis, ambient_dim: int) -> ExactLattice:
    basis = tuple(tuple(v) for v in as_int_rows(basis))
    gd = gram_determinant(basis) if basis else 1
    if basis and gd == 0:
        raise LatticeError("basis vectors are linearly dependent")
    return ExactLattice(ambient_dim, basis, gd, Fraction(gd))


def integer_kernel_basis(M, ncols: int | None = None) -> ExactLattice:
    """Basis of ``{v in Z^N : M v = 0}``.

    The kernel is read off a unimodular reduction of ``[M^T | I]``, which
    makes it saturated; the basis is then put into Hermite normal form so it
    is canonical.
    """
    rows = as_int_rows(M)
    N = len(rows[0]) if rows else ncols
    if N is None:
        raise LatticeError("cannot infer ambient dimension of an empty matrix")
    m = len(rows)
    aug = [[rows[i][j] for i in range(m)] + [int(j == k) for k in range(N)] for j in range(N)]
    r = _row_echelon(aug, m)
    kernel = [row[m:] for row in aug[r:]]
    basis = hermite_normal_form(kernel) if kernel else []
    return lattice_from_basis(basis, N)


def saturate(vectors) -> ExactLattice:
    """Basis of ``span_R(vectors) ∩ Z^N``."""
    V = as_int_rows(vectors)
    N = len(V[0])
    perp = integer_kernel_basis(V)
    if perp.rank == 0:
        return integer_kernel_basis([[0] * N])
    return integer_kernel_basis(perp.basis)


def quotient_order(spanning) -> int:
    """Order of ``L / L0`` where ``L0`` is spanned by the given independent vectors
    and ``L`` is all integer points of their real span.

    Equals the product of the invariant factors of the matrix whose rows are
    the spanning vectors.
    """
    V = as_int_rows(spanning)
    if gram_determinant(V) == 0:
        raise LatticeError("spanning vectors are linearly dependent")
    return math.prod(smith_invariants(V))


def quotient_order_enumerate(spanning, max_candidates: int = 1 << 23) -> int:
    """Count solutions ``t in (R/Z)^m`` of ``sum_i t_i x_i ≡ 0 (mod 1)`` directly.

    Every solution has denominator dividing the largest invariant factor, so
    only that finite grid is searched.
    """
    V = as_int_rows(spanning)
    if gram_determinant(V) == 0:
        raise LatticeError("spanning vectors are linearly dependent")
    inv = smith_invariants(V)
    D = inv[-1] if inv else 1
    m = len(V)
    if D ** m > max_candidates:
        raise LatticeError(f"enumeration over {D}^{m} candidates exceeds budget")
    X = np.array(V, dtype=np.int64) % D
    count = 0
    # enumerate k in [0, D)^m in chunks over the leading coordinates
    tail = min(m, max(1, int(math.log(1 << 16, max(D, 2)))))
    head = m - tail
    tail_grid = np.array(list(itertools.product(range(D), repeat=tail)), dtype=np.int64)
    tail_part = (tail_grid @ X[head:]) % D
    for prefix in itertools.product(range(D), repeat=head):
        base = (np.array(prefix, dtype=np.int64) @ X[:head]) % D if head else 0
        count += int(np.count_nonzero(((tail_part + base) % D == 0).all(axis=1)))
    return count


@dataclass(frozen=True)
class LatticeDuality:
    m: int
    perp_lattice: ExactLattice
    q: int
    vol0_squared: int
    saturated_vol_squared: Fraction


def perp_lattice_volume(spanning) -> LatticeDuality:
    """Integer points orthogonal to the spanning vectors, with their covolume.

    Checks ``Vol(L_perp)^2 = Vol(L0)^2 / q^2`` and ``Vol(L_perp) = Vol(L)``
    exactly, where ``L`` is the saturation of the span.
    """
    V = as_int_rows(spanning)
    vol0 = gram_determinant(V)
    if vol0 == 0:
        raise LatticeError("spanning vectors are linearly dependent")
    q = quotient_order(V)
    perp = integer_kernel_basis(V)
    if perp.rank != len(V[0]) - len(V):
        raise LatticeError("kernel rank disagrees with N - m")
    sat = saturate(V)
    if Fraction(perp.gram_det) != Fraction(vol0, q * q):
        raise LatticeError("Vol(L_perp)^2 != Vol(L0)^2 / q^2")
    if perp.gram_det != sat.gram_det:
        raise LatticeError("Vol(L_perp) != Vol(L)")
    return LatticeDuality(len(V), perp, q, vol0, Fraction(sat.gram_det))


# -- the two moment lattices ---------------------------------------------------

@dataclass(frozen=True)
class LatticeReport:
    lattice: ExactLattice
    bipartite: bool
    closed_form_vol_squared: Fraction | None
    closed_form_matches: bool | None
    expected_rank: int | None
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        out = self.lattice.to_dict()
        out["bipartite"] = self.bipartite
        out["closed_form_vol_squared"] = (
            None if self.closed_form_vol_squared is None else fraction_str(self.closed_form_vol_squared))
        out["closed_form_matches"] = self.closed_form_matches
        out["expected_rank"] = self.expected_rank
        out["notes"] = list(self.notes)
        return out


def first_moment_lattice(G: Multigraph) -> LatticeReport:
    """Integer flows ``ν`` on edges with zero sum at every vertex."""
    mats = build_matrices(G)
    lat = integer_kernel_basis(mats.Ahat)
    bip, _ = is_bipartite(G)
    AD = (mats.A + mats.D).tolist()
    if bip:
        expected = G.h - G.g + 1
        trimmed = [row[:-1] for row in AD[:-1]]
        closed = Fraction(bareiss_det(trimmed))
    else:
        expected = G.h - G.g
        closed = Fraction(bareiss_det(AD), 4)
    if lat.rank != expected:
        raise LatticeError(f"kernel rank {lat.rank} != {expected}")
    matches = closed == lat.vol_squared
    if not matches:
        raise LatticeError(f"closed form {closed} != kernel Gram value {lat.vol_squared}")
    return LatticeReport(lat, bip, closed, matches, expected)


def pair_index(G: Multigraph) -> list[tuple[int, int, int]]:
    """Coordinates ``(i, e, f)`` with ``e, f`` incident to ``i``, lexicographic."""
    return [(i, e, f) for i in range(G.g) for e in G.incident[i] for f in G.incident[i]]


def second_moment_constraints(G: Multigraph) -> list[list[int]]:
    """The ``g + 3h`` vectors whose orthogonal complement holds the second-moment lattice.

    Order: one per vertex (block sum), then for each edge the ``ee``, ``e·`` and
    ``·e`` vectors with signs from the stored edge orientation.
    """
    idx = pair_index(G)
    N = len(idx)
    vecs = []
    for j in range(G.g):
        vecs.append([int(i == j) for (i, _, _) in idx])
    sign = {}
    for k, (a, b) in enumerate(G.edges):
        sign[(a, k)] = 1
        sign[(b, k)] = -1
    one = [[0] * N for _ in range(G.h)]
    two = [[0] * N for _ in range(G.h)]
    three = [[0] * N for _ in range(G.h)]
    for c, (i, e, f) in enumerate(idx):
        if e == f:
            one[e][c] = sign[(i, e)]
        else:
            two[e][c] = sign[(i, e)]
            three[f][c] = sign[(i, f)]
    return vecs + one + two + three


def second_moment_closed_form(G: Multigraph, d: int) -> Fraction:
    """Squared covolume of the second-moment lattice for non-bipartite d-regular G."""
    g, h = G.g, G.h
    A = build_matrices(G).A
    dI_plus_A = (d * np.eye(g, dtype=np.int64) + A).tolist()
    other = (d * (2 * d - 3) * np.eye(g, dtype=np.int64) - A).tolist()
    return (Fraction(2) ** (3 * (h - g) - 4) * Fraction(d * (d - 2)) ** (h - g)
            * bareiss_det(dI_plus_A) ** 2 * bareiss_det(other))


def second_moment_lattice(G: Multigraph, d: int | None = None) -> LatticeReport:
    reg = G.regular_degree()
    if reg is None:
        raise LatticeError("second-moment lattice needs a regular graph")
    if d is not None and d != reg:
        raise LatticeError(f"graph is {reg}-regular, not {d}-regular")
    d = reg
    if d < 3:
        raise LatticeError("degree must be at least 3")
    X = second_moment_constraints(G)
    lat = integer_kernel_basis(X)
    bip, _ = is_bipartite(G)
    notes = []
    if bip:
        expected = d * d * G.g - G.g - 3 * G.h + 2
        agree = lat.rank == expected
        notes.append(f"bipartite: kernel rank {lat.rank}, "
                     f"d^2 g - g - 3h + 2 = {expected} ({'agrees' if agree else 'DISAGREES'})")
        log.warning("bipartite graph: closed-form determinant skipped, kernel path only")
        return LatticeReport(lat, True, None, None, expected, tuple(notes))
    expected = d * d * G.g - G.g - 3 * G.h
    if lat.rank != expected:
        raise LatticeError(f"kernel rank {lat.rank} != {expected}")
    closed = second_moment_closed_form(G, d)
    matches = closed == lat.vol_squared
    if not matches:
        raise LatticeError(f"closed form {closed} != kernel Gram value {lat.vol_squared}")
    return LatticeReport(lat, False, closed, True, expected, tuple(notes))
