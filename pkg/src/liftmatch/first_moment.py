"""Expected number of perfect matchings in a random lift."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .graph import Multigraph, build_matrices, is_bipartite
from .lattice import first_moment_lattice
from .laplace import (AsymptoticEstimate, EntropyField, LaplaceProblem, asymptotic_estimate,
                      exact_coset_sum)


class MomentError(ValueError):
    pass


def fractional_pm(G: Multigraph) -> tuple[Fraction, ...] | None:
    """A fractional perfect matching of ``G`` as exact rationals, or ``None``.

    Regular graphs get the uniform weighting; otherwise a vertex of the
    polytope is found by linear programming and rounded back to rationals.
    """
    d = G.regular_degree()
    if d is not None:
        return tuple(Fraction(1, d) for _ in range(G.h))
    Ahat = build_matrices(G).Ahat
    res = linprog(np.zeros(G.h), A_eq=Ahat, b_eq=np.ones(G.g), bounds=[(0, 1)] * G.h,
                  method="highs-ds")
    if res.status != 0:
        return None
    # LP vertices of this polytope are half-integral
    z = tuple(Fraction(round(2 * v), 2) for v in res.x)
    for v in range(G.g):
        if sum(z[e] for e in G.incident[v]) != 1:
            return None
    return z


def allowed_n(G: Multigraph, n: int) -> bool:
    """Whether some fractional perfect matching ``z`` makes ``n z`` integral.

    Equivalently, whether integer edge counts ``0 <= l <= n`` with ``n`` at
    every vertex exist; otherwise the lift has no perfect matching at all.
    """
    if n == 0:
        return True
    Ahat = build_matrices(G).Ahat.astype(float)
    res = milp(np.zeros(G.h), constraints=LinearConstraint(Ahat, n, n),
               integrality=np.ones(G.h), bounds=Bounds(0, n))
    return res.status == 0


def term_a1(G: Multigraph, n: int, ell) -> Fraction:
    """Expected number of perfect matchings using ``ell[e]`` edges of fiber ``e``."""
    ell = tuple(int(v) for v in ell)
    if len(ell) != G.h or any(v < 0 or v > n for v in ell):
        raise MomentError(f"edge counts must lie in [0, {n}]")
    for v in range(G.g):
        if sum(ell[e] for e in G.incident[v]) != n:
            raise MomentError(f"edge counts do not sum to n at vertex {v}")
    return _a1(n, G.g - G.h, ell)


def _a1(n: int, power: int, ell) -> Fraction:
    fn = math.factorial(n)
    num, den = 1, 1
    for v in ell:
        num *= math.factorial(n - v)
        den *= math.factorial(v)
    if power >= 0:
        num *= fn ** power
    else:
        den *= fn ** (-power)
    return Fraction(num, den)


def exact_first_moment(G: Multigraph, n: int, cap: int = 10**7) -> Fraction:
    """Exact ``E[X_G]`` for the random ``n``-lift by summing over the edge-count coset."""
    if n == 0:
        return Fraction(1)
    Ahat = build_matrices(G).Ahat.tolist()
    power = G.g - G.h
    return exact_coset_sum(lambda ell: _a1(n, power, ell), Ahat, [1] * G.g, n, cap=cap)


def first_moment_field(G: Multigraph) -> EntropyField:
    """``phi = sum_e (1-x_e) ln(1-x_e) - x_e ln x_e`` and ``psi = prod_e ((1-x_e)/x_e)^(1/2)``."""
    h = G.h
    F = np.vstack([-np.eye(h), np.eye(h)])
    offset = np.concatenate([np.ones(h), np.zeros(h)])
    phi_coef = np.concatenate([np.ones(h), -np.ones(h)])
    psi_exp = np.concatenate([0.5 * np.ones(h), -0.5 * np.ones(h)])
    return EntropyField(F, offset, phi_coef, psi_exp)


def first_moment_problem(G: Multigraph) -> LaplaceProblem:
    rep = first_moment_lattice(G)
    z = fractional_pm(G)
    if z is None:
        raise MomentError("graph has no fractional perfect matching")
    mats = build_matrices(G)
    d = G.regular_degree()
    return LaplaceProblem.from_field(
        rep.lattice, first_moment_field(G),
        start=np.array([float(v) for v in z]) if d is not None else None,
        constraints=(mats.Ahat.astype(float), np.ones(G.g)),
        b_power=Fraction(G.g - G.h, 2),
        proven_unique=d is not None and d >= 3,
        name=f"first moment of {G.name or 'G'}")


def closed_form_first_moment(G: Multigraph) -> AsymptoticEstimate:
    """Closed-form asymptotic ``E[X_G]`` for connected d-regular ``G``, ``d >= 3``."""
    d = G.regular_degree()
    if d is None or d < 3:
        raise MomentError("closed form needs a d-regular graph with d >= 3")
    g = G.g
    A = build_matrices(G).A
    bip, _ = is_bipartite(G)
    rate = g / 2 * math.log((d - 1) ** (d - 1) / d ** (d - 2))
    if not bip:
        det = float(np.linalg.det(A + d * np.eye(g)))
        C = 2 * (d - 1) ** ((d - 1) * g / 2) / ((d * (d - 2)) ** (d * g / 4 - g / 2) * math.sqrt(det))
        return AsymptoticEstimate(C=C, p_total=Fraction(0), exp_rate=rate)
    Ap = A[:-1, :-1]
    det = float(np.linalg.det(Ap + d * np.eye(g - 1)))
    C = ((d - 1) ** ((d - 1) * g / 2 + 0.5)
         / ((d * (d - 2)) ** (d * g / 4 - g / 2 + 0.5) * math.sqrt(det))) * math.sqrt(2 * math.pi)
    return AsymptoticEstimate(C=C, p_total=Fraction(1, 2), exp_rate=rate)


@dataclass
class FirstMomentAsymptotics:
    estimate: AsymptoticEstimate
    closed_form: AsymptoticEstimate
    analytic: dict
    relative_gap: float


def asymptotic_first_moment(G: Multigraph, multistart: int = 20, seed: int = 0,
                            rtol: float = 1e-9) -> FirstMomentAsymptotics:
    """Assemble the first-moment asymptotics through the Laplace engine and check it
    against the closed form and the analytic maximizer."""
    d = G.regular_degree()
    if d is None or d < 3:
        raise MomentError("asymptotics need a d-regular graph with d >= 3")
    prob = first_moment_problem(G)
    est = asymptotic_estimate(prob, multistart=multistart, seed=seed)
    closed = closed_form_first_moment(G)
    r = prob.rank
    analytic = {
        "x0": 1 / d,
        "phi0": G.g / 2 * math.log((d - 1) ** (d - 1) / d ** (d - 2)),
        "psi0": (d - 1) ** (G.h / 2),
        "det_neg_H_restricted": (d * (d - 2) / (d - 1)) ** r,
    }
    checks = [
        (float(np.max(np.abs(est.x0 - analytic["x0"]))), 1e-9, "x0"),
        (abs(est.exp_rate - analytic["phi0"]) / analytic["phi0"], rtol, "phi0"),
        (abs(est.psi0 - analytic["psi0"]) / analytic["psi0"], rtol, "psi0"),
        (abs(est.det_neg_H_restricted - analytic["det_neg_H_restricted"])
         / analytic["det_neg_H_restricted"], rtol, "det"),
    ]
    for err, tol, label in checks:
        if err > tol:
            raise MomentError(f"engine {label} disagrees with the analytic value ({err:.3e})")
    gap = abs(est.C - closed.C) / closed.C
    if gap > rtol or est.p_total != closed.p_total or abs(est.exp_rate - closed.exp_rate) > rtol:
        raise MomentError(f"engine and closed form disagree (relative gap {gap:.3e})")
    return FirstMomentAsymptotics(est, closed, analytic, gap)


@dataclass
class MomentReport:
    kind: str
    graph: str
    exact_values: dict[int, Fraction] = field(default_factory=dict)
    asymptotic: AsymptoticEstimate | None = None
    closed_form_check: bool | None = None

    def rows(self) -> list[dict]:
        out = []
        for n, val in sorted(self.exact_values.items()):
            row = {"n": n, "exact": {"num": str(val.numerator), "den": str(val.denominator)}}
            if self.asymptotic is not None:
                row["asymptotic_value_at_n"] = f"{self.asymptotic.value(n):.15g}"
                row["ratio"] = f"{ratio_to_estimate(val, self.asymptotic, n):.15g}" if val else "0"
            out.append(row)
        return out


def log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def ratio_to_estimate(exact: Fraction, est: AsymptoticEstimate, n: int) -> float:
    """``exact / estimate(n)`` computed in log space."""
    return math.exp(log_fraction(exact) - est.log_value(n))
