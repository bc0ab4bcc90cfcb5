"""Second moment of the perfect matching count.

A pair of perfect matchings ``(M1, M2)`` in the lift is summarized by
``l[i,e,f]``: the number of vertices above ``i`` matched along fiber ``e`` in
``M1`` and fiber ``f`` in ``M2``.  Coordinates follow :func:`pair_index`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import Multigraph
from .lattice import pair_index, second_moment_constraints, second_moment_lattice
from .laplace import (AsymptoticEstimate, EntropyField, LaplaceProblem, asymptotic_estimate,
                      iter_coset_points, estimate_points, BudgetExceeded, maximize_on_section,
                      SectionMaximum)
from .first_moment import MomentError


@dataclass(frozen=True)
class PairLayout:
    """Index bookkeeping for the ``(i, e, f)`` coordinates of one graph."""

    index: tuple[tuple[int, int, int], ...]
    coord: dict
    # per edge: endpoint used for s, t, u and the coordinates needed
    same: tuple[int, ...]                        # l[a,e,e]
    s_coords: tuple[tuple[int, ...], ...]        # l[a,e,f], f != e
    t_coords: tuple[tuple[int, ...], ...]        # l[a,f,e], f != e
    off_diagonal: tuple[int, ...]                # every l[i,e,f] with e != f

    @classmethod
    def of(cls, G: Multigraph) -> "PairLayout":
        idx = tuple(pair_index(G))
        coord = {key: c for c, key in enumerate(idx)}
        same, s_coords, t_coords = [], [], []
        for e, (a, _) in enumerate(G.edges):
            same.append(coord[(a, e, e)])
            s_coords.append(tuple(coord[(a, e, f)] for f in G.incident[a] if f != e))
            t_coords.append(tuple(coord[(a, f, e)] for f in G.incident[a] if f != e))
        off = tuple(c for c, (_, e, f) in enumerate(idx) if e != f)
        return cls(idx, coord, tuple(same), tuple(s_coords), tuple(t_coords), off)


def check_pair_config(G: Multigraph, n: int, ell, layout: PairLayout | None = None) -> None:
    """Raise :class:`MomentError` unless ``ell`` is a valid pair configuration for ``n``."""
    layout = layout or PairLayout.of(G)
    if len(ell) != len(layout.index):
        raise MomentError(f"expected {len(layout.index)} coordinates, got {len(ell)}")
    if any(v < 0 for v in ell):
        raise MomentError("negative count")
    c = layout.coord
    for i in range(G.g):
        if sum(ell[c[(i, e, f)]] for e in G.incident[i] for f in G.incident[i]) != n:
            raise MomentError(f"counts at vertex {i} do not sum to n")
    for e, (a, b) in enumerate(G.edges):
        if ell[c[(a, e, e)]] != ell[c[(b, e, e)]]:
            raise MomentError(f"edge {e}: shared-edge counts differ at the two ends")
        if (sum(ell[c[(a, e, f)]] for f in G.incident[a])
                != sum(ell[c[(b, e, f)]] for f in G.incident[b])):
            raise MomentError(f"edge {e}: first-matching counts differ at the two ends")
        if (sum(ell[c[(a, f, e)]] for f in G.incident[a])
                != sum(ell[c[(b, f, e)]] for f in G.incident[b])):
            raise MomentError(f"edge {e}: second-matching counts differ at the two ends")


def _a2(n: int, g: int, h: int, layout: PairLayout, ell) -> Fraction:
    fact = math.factorial
    num, den = 1, 1
    for e in range(h):
        same = ell[layout.same[e]]
        s = sum(ell[c] for c in layout.s_coords[e])
        t = sum(ell[c] for c in layout.t_coords[e])
        u = n - s - t - same
        num *= fact(s) * fact(t) * fact(u)
        den *= fact(same)
    for c in layout.off_diagonal:
        den *= fact(ell[c])
    power = g - h
    if power >= 0:
        num *= fact(n) ** power
    else:
        den *= fact(n) ** (-power)
    return Fraction(num, den)


def term_a2(G: Multigraph, n: int, ell) -> Fraction:
    """Expected number of ordered pairs of perfect matchings with profile ``ell``.

    The square roots in the per-endpoint form cancel because both endpoints
    of an edge contribute the same ``s, t, u`` and diagonal count; the
    product over the two ends is taken first so only integer factorials occur.
    """
    layout = PairLayout.of(G)
    ell = tuple(int(v) for v in ell)
    check_pair_config(G, n, ell, layout)
    return _a2(n, G.g, G.h, layout, ell)


def second_moment_rhs(G: Multigraph) -> list[int]:
    return [1] * G.g + [0] * (3 * G.h)


def exact_second_moment(G: Multigraph, n: int, cap: int = 10**7) -> Fraction:
    """Exact ``E[X_G^2]`` by enumerating every admissible pair profile."""
    if n == 0:
        return Fraction(1)
    layout = PairLayout.of(G)
    C = second_moment_constraints(G)
    est = estimate_points(C, n)
    if est > cap:
        raise BudgetExceeded(est, cap)
    total = Fraction(0)
    for count, ell in enumerate(iter_coset_points(C, second_moment_rhs(G), n), 1):
        total += _a2(n, G.g, G.h, layout, ell)
        if count > cap:
            raise BudgetExceeded(count, cap)
    return total


def second_moment_field(G: Multigraph) -> EntropyField:
    """The second-moment ``phi`` and ``psi`` as sums over affine forms in ``x[i,e,f]``."""
    layout = PairLayout.of(G)
    N = len(layout.index)
    c = layout.coord
    rows, phi_coef, psi_exp = [], [], []

    def add(coords, pc, pe):
        row = np.zeros(N)
        row[list(coords)] = 1.0
        rows.append(row)
        phi_coef.append(pc)
        psi_exp.append(pe)

    for i in range(G.g):
        inc = G.incident[i]
        for e in inc:
            others = [f for f in inc if f != e]
            add([c[(i, e, f)] for f in others], 0.5, 0.25)                     # sigma
            add([c[(i, f, e)] for f in others], 0.5, 0.25)                     # tau
            add([c[(i, f, f2)] for f in others for f2 in others], 0.5, 0.25)   # gamma
            add([c[(i, e, e)]], -0.5, -0.25)
            for f in others:
                add([c[(i, e, f)]], -1.0, -0.5)
    F = np.array(rows)
    return EntropyField(F, np.zeros(len(rows)), np.array(phi_coef), np.array(psi_exp))


def second_moment_problem(G: Multigraph) -> LaplaceProblem:
    d = G.regular_degree()
    if d is None or d < 3:
        raise MomentError("second-moment asymptotics need a d-regular graph with d >= 3")
    rep = second_moment_lattice(G)
    N = rep.lattice.ambient_dim
    C = np.array(second_moment_constraints(G), dtype=float)
    return LaplaceProblem.from_field(
        rep.lattice, second_moment_field(G),
        start=np.full(N, 1.0 / d**2),
        constraints=(C, np.array(second_moment_rhs(G), dtype=float)),
        b_power=Fraction(G.g + 3 * G.h - N, 2),
        proven_unique=(d == 3),
        name=f"second moment of {G.name or 'G'}")


@dataclass
class MaximizerReport:
    maximum: SectionMaximum
    phi0_expected: float
    psi0_expected: float
    x0_error: float
    phi0_error: float
    status: str


def verify_phi2_maximizer(G: Multigraph, multistart: int = 100, seed: int = 0) -> MaximizerReport:
    """Locate the second-moment maximizer and compare with the uniform point.

    For cubic graphs the uniform point is the known unique maximizer and the
    check is strict; for higher degree the result is only multistart evidence.
    """
    prob = second_moment_problem(G)
    d = G.regular_degree()
    m = maximize_on_section(prob, multistart=multistart, seed=seed)
    phi0 = G.g * math.log((d - 1) ** (d - 1) / d ** (d - 2))
    psi0 = float((d - 1) * d ** (d - 2)) ** (d * G.g)
    x_err = float(np.max(np.abs(m.x0 - 1.0 / d**2)))
    phi_err = abs(m.value - phi0)
    if d == 3 and (x_err > 1e-9 or phi_err > 1e-10 or not m.multistart_agreement):
        raise MomentError(f"cubic maximizer check failed (x err {x_err:.2e}, phi err {phi_err:.2e})")
    return MaximizerReport(m, phi0, psi0, x_err, phi_err, m.status)


def vertex_block_stationary_points(d: int, starts: int = 200, seed: int = 0,
                                   tol: float = 1e-12) -> list[np.ndarray]:
    """Stationary points of one vertex block of the second-moment objective on the
    simplex ``sum x = 1`` that lie strictly inside ``(0,1)^(d^2)``.

    Runs undamped-then-damped Newton on the projected gradient from random
    interior starts and returns the distinct limits.
    """
    G = Multigraph(2, tuple((0, 1) for _ in range(d)))
    fld = second_moment_field(G)
    # vertex 0 occupies the first d^2 coordinates and its forms come first
    k = d * d
    nforms = d * (4 + d - 1)
    F = fld.F[:nforms, :k]
    blk = EntropyField(F, np.zeros(nforms), fld.phi_coef[:nforms], fld.psi_exp[:nforms])
    Q, _ = np.linalg.qr(np.vstack([np.ones(k), np.eye(k)[:-1]]).T)
    Z = Q[:, 1:]
    rng = np.random.default_rng(seed)
    found: list[np.ndarray] = []
    for _ in range(starts):
        x = rng.dirichlet(np.ones(k))
        for _ in range(200):
            g = Z.T @ blk.gradient(x)
            if np.linalg.norm(g) < tol:
                break
            H = Z.T @ blk.hessian(x) @ Z
            step = Z @ np.linalg.lstsq(H, -g, rcond=None)[0]
            t = 1.0
            while np.any(x + t * step <= 0) and t > 1e-12:
                t *= 0.5
            x = x + t * step
        else:
            continue
        if np.linalg.norm(Z.T @ blk.gradient(x)) < 1e-9 and np.all(x > 0) and np.all(x < 1):
            if all(np.max(np.abs(x - y)) > 1e-7 for y in found):
                found.append(x)
    return found


@dataclass
class SecondMomentAsymptotics:
    estimate: AsymptoticEstimate
    maximizer_status: str
    formula_C: float


def asymptotic_second_moment(G: Multigraph, multistart: int = 20, seed: int = 0) -> SecondMomentAsymptotics:
    """Asymptotic ``E[X^2] ~ C n^p e^(n rate)`` from the lattice and the numeric Hessian."""
    prob = second_moment_problem(G)
    d = G.regular_degree()
    est = asymptotic_estimate(prob, multistart=multistart, seed=seed)
    g, r = G.g, prob.rank
    psi0 = float((d - 1) * d ** (d - 2)) ** (d * g)
    rate = g * math.log((d - 1) ** (d - 1) / d ** (d - 2))
    if abs(est.exp_rate - rate) > 1e-9 * abs(rate):
        raise MomentError("maximum value differs from the uniform-point value")
    power = Fraction(r, 2) + Fraction(g, 2) + Fraction(3 * d * g, 4) - Fraction(d * d * g, 2)
    if est.p_total != power:
        raise MomentError(f"polynomial power {est.p_total} != {power}")
    formula_C = (psi0 / (math.sqrt(prob.lattice.vol_squared) * math.sqrt(est.det_neg_H_restricted))
                 * (2 * math.pi) ** float(power))
    if abs(formula_C - est.C) > 1e-9 * formula_C:
        raise MomentError("engine constant differs from the direct assembly")
    status = "proven" if d == 3 else "heuristic"
    est.maximizer_status = status
    return SecondMomentAsymptotics(est, status, formula_C)
