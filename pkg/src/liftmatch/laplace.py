"""Laplace-method summation over lattice cosets.

The numeric side maximizes a smooth objective on an affine section of the
unit box, evaluates the restricted Hessian determinant and assembles

    sum_l a_n(l) ~ (2 pi)^(r/2) psi(x0) / (Vol(L) det(-H|_V)^(1/2)) b_n n^(r/2) e^(n phi(x0)).

The exact side enumerates the same coset with integer backtracking, which
is what the asymptotics are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .lattice import ExactLattice, as_int_rows, integer_kernel_basis


class LaplaceError(RuntimeError):
    pass


class ConvergenceError(LaplaceError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (gradient residual {residual:.3e})")
        self.residual = residual


class BudgetExceeded(RuntimeError):
    def __init__(self, estimate: int, cap: int):
        super().__init__(f"enumeration needs about {estimate} points, cap is {cap}")
        self.estimate = estimate
        self.cap = cap


# -- objectives built from affine forms ----------------------------------------

@dataclass
class EntropyField:
    """``phi(x) = sum_k c_k L_k ln L_k`` and ``psi(x) = prod_k L_k^{p_k}``.

    Each ``L_k(x) = F[k] @ x + offset[k]`` is affine.  Both moment objectives
    are of this shape, which gives exact gradients and Hessians for free.
    """

    F: np.ndarray
    offset: np.ndarray
    phi_coef: np.ndarray
    psi_exp: np.ndarray

    def forms(self, x: np.ndarray) -> np.ndarray:
        return self.F @ x + self.offset

    def phi(self, x) -> float:
        L = self.forms(np.asarray(x, dtype=float))
        if np.any(L <= 0):
            return -np.inf
        return float(self.phi_coef @ (L * np.log(L)))

    def gradient(self, x) -> np.ndarray:
        L = self.forms(np.asarray(x, dtype=float))
        return self.F.T @ (self.phi_coef * (np.log(L) + 1.0))

    def hessian(self, x) -> np.ndarray:
        L = self.forms(np.asarray(x, dtype=float))
        return (self.F.T * (self.phi_coef / L)) @ self.F

    def psi(self, x) -> float:
        L = self.forms(np.asarray(x, dtype=float))
        return float(np.exp(self.psi_exp @ np.log(L)))


@dataclass
class LaplaceProblem:
    """One instance of the summation theorem.

    ``start`` must lie on the affine section W; when it is ``None`` the
    analytic center of ``K ∩ W`` is computed from ``constraints``
    (``C x = rhs``).  ``b_const`` and ``b_power`` encode
    ``b_n = b_const * (2 pi n)^b_power``.
    """

    lattice: ExactLattice
    phi: Callable[[np.ndarray], float]
    phi_gradient: Callable[[np.ndarray], np.ndarray]
    phi_hessian: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], float]
    start: np.ndarray | None = None
    constraints: tuple[np.ndarray, np.ndarray] | None = None
    b_const: float = 1.0
    b_power: Fraction = Fraction(0)
    proven_unique: bool = False
    name: str = ""

    @property
    def N(self) -> int:
        return self.lattice.ambient_dim

    @property
    def rank(self) -> int:
        return self.lattice.rank

    @classmethod
    def from_field(cls, lattice: ExactLattice, fld: EntropyField, **kw) -> "LaplaceProblem":
        return cls(lattice=lattice, phi=fld.phi, phi_gradient=fld.gradient,
                   phi_hessian=fld.hessian, psi=fld.psi, **kw)


# -- maximization ----------------------------------------------------------------

INTERIOR_MARGIN = 1e-12


def _section_basis(lattice: ExactLattice) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the lattice."""
    if lattice.rank == 0:
        return np.zeros((lattice.ambient_dim, 0))
    Q, _ = np.linalg.qr(lattice.basis_array().T)
    return Q


def _interior(x: np.ndarray, margin: float = INTERIOR_MARGIN) -> bool:
    return bool(np.all(x > margin) and np.all(x < 1 - margin))


def analytic_center(C, rhs, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Maximizer of ``sum ln x_i + ln(1 - x_i)`` over ``{C x = rhs} ∩ (0,1)^N``."""
    C = np.asarray(C, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    N = C.shape[1]
    # phase one: maximize the smallest slack
    c = np.zeros(N + 1)
    c[-1] = -1.0
    A_ub = np.zeros((2 * N, N + 1))
    A_ub[:N, :N] = -np.eye(N)
    A_ub[:N, -1] = 1.0
    A_ub[N:, :N] = np.eye(N)
    A_ub[N:, -1] = 1.0
    b_ub = np.concatenate([np.zeros(N), np.ones(N)])
    A_eq = np.hstack([C, np.zeros((C.shape[0], 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=rhs,
                  bounds=[(None, None)] * N + [(0, 0.5)], method="highs")
    if res.status != 0 or res.x[-1] <= INTERIOR_MARGIN:
        raise LaplaceError("no strictly interior feasible point")
    x = res.x[:N]
    kernel = integer_kernel_basis(np.rint(C).astype(np.int64).tolist()) if np.allclose(C, np.rint(C)) else None
    if kernel is not None:
        Z = _section_basis(kernel)
    else:
        _, s, vt = np.linalg.svd(C)
        Z = vt[int(np.sum(s > 1e-10)):].T
    for _ in range(max_iter):
        g = Z.T @ (1 / x - 1 / (1 - x))
        if np.linalg.norm(g) < tol:
            break
        Hr = -(Z.T * (1 / x**2 + 1 / (1 - x) ** 2)) @ Z
        step = Z @ np.linalg.solve(Hr, -g)
        t = 1.0
        while not _interior(x + t * step, 0.0):
            t *= 0.5
        x = x + t * step
    return x


@dataclass
class SectionMaximum:
    x0: np.ndarray
    value: float
    residual: float
    iterations: int
    multistart_runs: int
    multistart_agreement: bool
    multistart_spread: float
    status: str  # "proven", "heuristic-unique" or "not-unique"
    distinct_maxima: list[np.ndarray] = field(default_factory=list)


def _newton_ascent(problem: LaplaceProblem, x: np.ndarray, Z: np.ndarray,
                   tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    if Z.shape[1] == 0:
        return x, 0.0, 0
    f = problem.phi(x)
    res = np.inf
    for it in range(1, max_iter + 1):
        g = Z.T @ problem.phi_gradient(x)
        res = float(np.linalg.norm(g))
        if res < tol:
            return x, res, it
        Hr = Z.T @ problem.phi_hessian(x) @ Z
        lam, Q = np.linalg.eigh((Hr + Hr.T) / 2)
        # ascent direction; indefinite curvature is flipped to keep it uphill
        scale = np.maximum(np.abs(lam), 1e-10)
        step = Z @ (Q @ ((Q.T @ g) / scale))
        t = 1.0
        while t > 1e-30:
            cand = x + t * step
            if _interior(cand):
                fc = problem.phi(cand)
                if fc >= f + 1e-4 * t * float(g @ (Z.T @ step)) or (fc >= f and res < 1e-8):
                    break
            t *= 0.5
        else:
            if res < 1e3 * tol:
                return x, res, it
            raise ConvergenceError("line search failed", res)
        if np.allclose(cand, x, rtol=0, atol=1e-17):
            return cand, res, it
        x, f = cand, fc
    raise ConvergenceError(f"no convergence in {max_iter} iterations", res)


def random_interior_points(center: np.ndarray, Z: np.ndarray, count: int,
                           rng: np.random.Generator) -> list[np.ndarray]:
    """Points of the section strictly inside the box, along random rays from ``center``."""
    pts = []
    for _ in range(count):
        v = Z @ rng.standard_normal(Z.shape[1])
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(v > 0, (1 - center) / v, np.inf)
            down = np.where(v < 0, -center / v, np.inf)
        tmax = float(min(up.min(), down.min()))
        pts.append(center + rng.uniform(0.05, 0.98) * tmax * v)
    return pts


def maximize_on_section(problem: LaplaceProblem, multistart: int = 100, seed: int = 0,
                        tol: float = 1e-12, max_iter: int = 200,
                        agreement_tol: float = 1e-8) -> SectionMaximum:
    """Locate the maximum of ``phi`` on ``K° ∩ W`` by Newton's method in section
    coordinates, then rerun from random interior starts to test uniqueness."""
    if problem.start is not None:
        x_start = np.asarray(problem.start, dtype=float)
    elif problem.constraints is not None:
        x_start = analytic_center(*problem.constraints)
    else:
        raise LaplaceError("problem has neither a start point nor constraints")
    if not _interior(x_start):
        raise LaplaceError("start point is not strictly inside the box")
    Z = _section_basis(problem.lattice)
    x0, res, its = _newton_ascent(problem, x_start.copy(), Z, tol, max_iter)
    rng = np.random.default_rng(seed)
    found = [x0]
    spread = 0.0
    runs = 0
    if Z.shape[1] and multistart:
        for s in random_interior_points(x_start, Z, multistart, rng):
            try:
                xs, _, _ = _newton_ascent(problem, s, Z, tol, max_iter)
            except ConvergenceError:
                continue
            runs += 1
            dist = float(np.max(np.abs(xs - x0)))
            spread = max(spread, dist)
            if all(np.max(np.abs(xs - y)) > agreement_tol for y in found):
                found.append(xs)
    agree = len(found) == 1
    if problem.proven_unique:
        status = "proven"
    else:
        status = "heuristic-unique" if agree else "not-unique"
    best = max(found, key=problem.phi)
    return SectionMaximum(x0=best, value=problem.phi(best), residual=res, iterations=its,
                          multistart_runs=runs, multistart_agreement=agree,
                          multistart_spread=spread, status=status, distinct_maxima=found)


# -- the estimate ----------------------------------------------------------------

def hessian_restricted_det(H, basis) -> float:
    """``det(B|_V)`` for the bilinear form ``B = -H`` on the span of ``basis``.

    Computed as ``det(-H(z_i, z_j)) / det(<z_i, z_j>)``, independent of the basis.
    """
    Zb = np.asarray(basis, dtype=float)
    if Zb.size == 0:
        return 1.0
    gram = Zb @ Zb.T
    sg, lg = np.linalg.slogdet(gram)
    if sg <= 0:
        raise LaplaceError("basis vectors are dependent (singular Gram matrix)")
    sh, lh = np.linalg.slogdet(Zb @ (-np.asarray(H, dtype=float)) @ Zb.T)
    if sh == 0:
        return 0.0
    return float(sh * np.exp(lh - lg))


@dataclass
class AsymptoticEstimate:
    """``C * n^p_total * exp(n * exp_rate)``."""

    C: float
    p_total: Fraction
    exp_rate: float
    x0: np.ndarray | None = None
    psi0: float | None = None
    det_neg_H_restricted: float | None = None
    vol_squared: Fraction | None = None
    rank: int | None = None
    multistart_agreement: bool | None = None
    maximizer_status: str | None = None
    audit: dict = field(default_factory=dict)

    def log_value(self, n: float) -> float:
        return math.log(self.C) + float(self.p_total) * math.log(n) + n * self.exp_rate

    def value(self, n: float) -> float:
        return math.exp(self.log_value(n))

    def to_dict(self) -> dict:
        out = {
            "C": f"{self.C:.15g}",
            "p_total": str(self.p_total),
            "exp_rate": f"{self.exp_rate:.15g}",
        }
        if self.det_neg_H_restricted is not None:
            out["det_neg_H_restricted"] = f"{self.det_neg_H_restricted:.15g}"
        if self.vol_squared is not None:
            out["vol_squared"] = f"{self.vol_squared.numerator}/{self.vol_squared.denominator}"
        if self.x0 is not None:
            out["x0"] = [float(f"{v:.15g}") for v in self.x0]
        if self.multistart_agreement is not None:
            out["multistart_agreement"] = self.multistart_agreement
        if self.maximizer_status is not None:
            out["maximizer_status"] = self.maximizer_status
        if self.audit:
            out["audit"] = dict(self.audit)
        return out


def asymptotic_estimate(problem: LaplaceProblem, maximum: SectionMaximum | None = None,
                        **max_kw) -> AsymptoticEstimate:
    if maximum is None:
        maximum = maximize_on_section(problem, **max_kw)
    x0 = maximum.x0
    psi0 = problem.psi(x0)
    det = hessian_restricted_det(problem.phi_hessian(x0), problem.lattice.basis_array())
    audit = {
        "x0_interior": _interior(x0),
        "psi_positive": bool(psi0 > 0),
        "det_positive": bool(det > 0),
    }
    failed = [k for k, ok in audit.items() if not ok]
    if failed:
        raise LaplaceError(f"hypotheses violated: {', '.join(failed)}")
    r = problem.rank
    vol = math.sqrt(problem.lattice.vol_squared)
    C = ((2 * math.pi) ** (r / 2) * psi0 / (vol * math.sqrt(det))
         * problem.b_const * (2 * math.pi) ** float(problem.b_power))
    return AsymptoticEstimate(
        C=C, p_total=Fraction(r, 2) + Fraction(problem.b_power), exp_rate=maximum.value,
        x0=x0, psi0=psi0, det_neg_H_restricted=det, vol_squared=problem.lattice.vol_squared,
        rank=r, multistart_agreement=maximum.multistart_agreement,
        maximizer_status=maximum.status, audit=audit)


# -- exact enumeration -------------------------------------------------------------

def estimate_points(C, n: int) -> int:
    """Crude upper estimate ``(n+1)^rank`` of the coset size inside ``nK``."""
    ker = integer_kernel_basis(as_int_rows(C))
    return (n + 1) ** ker.rank


def iter_coset_points(C, rhs: Sequence[int], n: int, upper: int | None = None):
    """Yield every integer ``l in [0, upper]^N`` with ``C l = n * rhs`` (tuples, lexicographic)."""
    C = as_int_rows(C)
    upper = n if upper is None else upper
    k = len(C)
    N = len(C[0])
    target = [n * int(b) for b in rhs]
    smin = [[0] * (N + 1) for _ in range(k)]
    smax = [[0] * (N + 1) for _ in range(k)]
    for j in range(k):
        for t in range(N - 1, -1, -1):
            c = C[j][t] * upper
            smin[j][t] = smin[j][t + 1] + min(0, c)
            smax[j][t] = smax[j][t + 1] + max(0, c)
    touching = [[(j, C[j][t]) for j in range(k) if C[j][t]] for t in range(N)]
    partial = [0] * k
    point = [0] * N

    def rec(t):
        if t == N:
            if partial == target:
                yield tuple(point)
            return
        lo, hi = 0, upper
        for j, c in touching[t]:
            # target - partial - c v must lie in [smin, smax] of the suffix
            a = target[j] - partial[j] - smax[j][t + 1]
            b = target[j] - partial[j] - smin[j][t + 1]
            if c > 0:
                lo = max(lo, -((-a) // c))
                hi = min(hi, b // c)
            else:
                lo = max(lo, -((-b) // c))
                hi = min(hi, a // c)
            if lo > hi:
                return
        for v in range(lo, hi + 1):
            point[t] = v
            for j, c in touching[t]:
                partial[j] += c * v
            yield from rec(t + 1)
            for j, c in touching[t]:
                partial[j] -= c * v
        point[t] = 0

    yield from rec(0)


def exact_coset_sum(term_fn: Callable[[tuple[int, ...]], Fraction], C, rhs, n: int,
                    cap: int = 10**7, upper: int | None = None) -> Fraction:
    """Exact ``sum a_n(l)`` over integer ``l in [0,n]^N`` with ``C l = n * rhs``."""
    est = estimate_points(C, n)
    if est > cap:
        raise BudgetExceeded(est, cap)
    total = Fraction(0)
    count = 0
    for point in iter_coset_points(C, rhs, n, upper):
        total += term_fn(point)
        count += 1
        if count > cap:
            raise BudgetExceeded(count, cap)
    return total


# -- finite differences (used by tests and audits) ---------------------------------

def fd_gradient(f, x, step: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def fd_hessian(grad, x, step: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    H = np.empty((x.size, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * step)
    return (H + H.T) / 2
