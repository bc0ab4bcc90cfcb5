"""Non-backtracking walks, short-cycle statistics and the conditioning constant."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Multigraph, build_matrices, is_bipartite
from .lattice import bareiss_det


class WalkCountMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class NBMatrix:
    R: np.ndarray
    directed_edges: tuple[tuple[int, int, int], ...]  # (edge, tail, head)


def nb_matrix(G: Multigraph) -> NBMatrix:
    """Non-backtracking transition matrix on directed edges ``(e, i, j)``.

    ``R[(e,i,j), (f,p,q)] = 1`` iff ``p == j`` and ``f != e``.
    """
    darts = []
    for e, (i, j) in enumerate(G.edges):
        darts.append((e, i, j))
        darts.append((e, j, i))
    m = len(darts)
    R = np.zeros((m, m), dtype=np.int64)
    by_tail: dict[int, list[int]] = {}
    for k, (_, p, _) in enumerate(darts):
        by_tail.setdefault(p, []).append(k)
    for a, (e, _, j) in enumerate(darts):
        for b in by_tail.get(j, ()):
            if darts[b][0] != e:
                R[a, b] = 1
    d = G.regular_degree()
    if d is not None:
        assert np.all(R.sum(axis=1) == d - 1)
    return NBMatrix(R, tuple(darts))


def walk_counts_trace(G: Multigraph, kmax: int) -> list[int]:
    """``w_k = Tr(R^k)`` for ``k = 1..kmax`` by exact integer matrix powers."""
    R = nb_matrix(G).R.astype(object)
    P = R.copy()
    out = []
    for _ in range(kmax):
        out.append(int(np.trace(P)))
        P = P.dot(R)
    return out


def nb_eigenvalues(G: Multigraph) -> list[complex]:
    """Spectrum of ``R`` from the adjacency spectrum (regular graphs only)."""
    d = G.regular_degree()
    if d is None or d < 3:
        raise ValueError("spectral formula needs a d-regular graph with d >= 3")
    alphas = build_matrices(G).alphas
    vals = []
    for a in alphas:
        root = cmath.sqrt(a * a / 4 - (d - 1))
        vals += [a / 2 + root, a / 2 - root]
    extra = G.g * (d - 2) // 2
    return vals + [1.0] * extra + [-1.0] * extra


def walk_counts_spectral(G: Multigraph, kmax: int) -> list[int]:
    d = G.regular_degree()
    alphas = build_matrices(G).alphas
    betas = []
    for a in alphas:
        root = cmath.sqrt(a * a / 4 - (d - 1))
        betas += [a / 2 + root, a / 2 - root]
    out = []
    for k in range(1, kmax + 1):
        val = 0.5 * G.g * (d - 2) * (1 + (-1) ** k) + sum(b**k for b in betas)
        out.append(int(round(val.real)))
    return out


def walk_counts(G: Multigraph, kmax: int) -> list[int]:
    """``[w_2, ..., w_kmax]``: non-backtracking closed walk counts, cross-checked
    between the trace of ``R^k`` and the adjacency-spectrum formula."""
    trace = walk_counts_trace(G, kmax)
    if G.regular_degree() is not None and G.regular_degree() >= 3:
        spectral = walk_counts_spectral(G, kmax)
        if spectral != trace:
            bad = next(k + 1 for k in range(kmax) if spectral[k] != trace[k])
            raise WalkCountMismatch(f"trace and spectral walk counts differ at k={bad}")
    return trace[1:]


@dataclass
class CycleSpectrum:
    kmax: int
    d: int
    w: list[int]          # w_2 .. w_kmax
    lam: list[float]
    delta: list[float]
    mu: list[float]
    ssc_constant: float
    tail_bound: float = 0.0
    bipartite: bool = False

    @property
    def ks(self) -> range:
        return range(2, self.kmax + 1)

    def rows(self) -> list[dict]:
        return [{"k": k, "w_k": w, "lambda_k": f"{l:.12g}", "delta_k": f"{dl:.12g}",
                 "mu_k": f"{m:.12g}"}
                for k, w, l, dl, m in zip(self.ks, self.w, self.lam, self.delta, self.mu)]


def cycle_series(G: Multigraph, kmax: int = 20) -> CycleSpectrum:
    d = G.regular_degree()
    if d is None or d < 3:
        raise ValueError("cycle series needs a d-regular graph with d >= 3")
    w = walk_counts(G, kmax)
    ks = range(2, kmax + 1)
    lam = [wk / (2 * k) for k, wk in zip(ks, w)]
    delta = [(-1 / (d - 1)) ** k for k in ks]
    mu = [(1 + dl) * l for dl, l in zip(delta, lam)]
    const = ssc_constant(G).value
    # tail of sum lambda_k delta_k^2 with ratio max|theta| / (d-1)^2 = 1/(d-1)
    ratio = 1 / (d - 1)
    tail = (G.h * 2) / (2 * (kmax + 1)) * ratio ** (kmax + 1) / (1 - ratio)
    bip, _ = is_bipartite(G)
    return CycleSpectrum(kmax, d, w, lam, delta, mu, const, tail, bip)


@dataclass
class SSCConstant:
    value: float
    via_R: float
    via_adjacency: float
    relative_gap: float
    partial_sums: list[float] = field(default_factory=list)


def ssc_via_R(G: Multigraph) -> float:
    d = G.regular_degree()
    R = nb_matrix(G).R
    m = R.shape[0]
    M = (d - 1) ** 2 * np.eye(m, dtype=np.int64) - R
    det = bareiss_det(M.tolist())
    if det <= 0:
        raise ArithmeticError("spectral radius condition violated")
    return math.exp(m * math.log(d - 1) - 0.5 * math.log(det))


def ssc_via_adjacency(G: Multigraph) -> float:
    d = G.regular_degree()
    g = G.g
    A = build_matrices(G).A
    M = ((d - 1) ** 3 + 1) * np.eye(g, dtype=np.int64) - (d - 1) * A
    det = bareiss_det(M.tolist())
    log_val = ((d * g - g / 2) * math.log(d - 1)
               - (d - 2) * g / 4 * math.log((d - 1) ** 4 - 1) - 0.5 * math.log(det))
    return math.exp(log_val)


def ssc_constant(G: Multigraph, kmax_series: int = 60, rtol: float = 1e-9) -> SSCConstant:
    """``exp(sum_k lambda_k delta_k^2)`` evaluated through ``det((d-1)^2 I - R)``
    and through the adjacency spectrum; the two must agree."""
    d = G.regular_degree()
    if d is None or d < 3:
        raise ValueError("needs a d-regular graph with d >= 3")
    a = ssc_via_R(G)
    b = ssc_via_adjacency(G)
    gap = abs(a - b) / b
    if gap > rtol:
        raise ArithmeticError(f"determinant and adjacency forms disagree ({gap:.3e})")
    w = walk_counts_trace(G, kmax_series)
    partial, acc = [], 0.0
    for k, wk in enumerate(w, 1):
        acc += wk / (2 * k * (d - 1) ** (2 * k))
        partial.append(acc)
    return SSCConstant(b, a, b, gap, partial)


@dataclass
class A4Report:
    lhs: float
    rhs: float
    relative_difference: float
    power_cancels: bool
    rate_cancels: bool
    passed: bool

    def to_dict(self) -> dict:
        return {"lhs": f"{self.lhs:.15g}", "rhs": f"{self.rhs:.15g}",
                "relative_difference": f"{self.relative_difference:.3e}",
                "power_cancels": self.power_cancels, "rate_cancels": self.rate_cancels,
                "pass": self.passed}


def a4_compare(first, second, rhs: float, rtol: float = 1e-6) -> A4Report:
    """Compare ``E[X^2] / E[X]^2`` (from two asymptotic estimates) with ``rhs``."""
    power_ok = second.p_total - 2 * first.p_total == 0
    rate_ok = abs(second.exp_rate - 2 * first.exp_rate) <= 1e-9 * max(1.0, abs(second.exp_rate))
    lhs = second.C / first.C**2
    rel = abs(lhs - rhs) / rhs
    return A4Report(lhs, rhs, rel, power_ok, rate_ok, bool(power_ok and rate_ok and rel < rtol))


def a4_check(G: Multigraph, rtol: float = 1e-6, multistart: int = 10) -> A4Report:
    from .first_moment import asymptotic_first_moment
    from .second_moment import asymptotic_second_moment

    first = asymptotic_first_moment(G, multistart=multistart).estimate
    second = asymptotic_second_moment(G, multistart=multistart).estimate
    return a4_compare(first, second, ssc_constant(G).value, rtol)


def sample_limit_W(spectrum: CycleSpectrum, count: int, seed: int,
                   kmax: int | None = None) -> np.ndarray:
    """Draws of ``prod_k (1 + delta_k)^Y_k exp(-lambda_k delta_k)`` with independent
    ``Y_k ~ Poisson(lambda_k)``; only terms with ``lambda_k > 0`` contribute."""
    kmax = spectrum.kmax if kmax is None else kmax
    log_w = np.zeros(count)
    for k, lam, dl in zip(spectrum.ks, spectrum.lam, spectrum.delta):
        if k > kmax or lam == 0 or dl == 0:
            continue
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1, k))))
        y = rng.poisson(lam, size=count)
        log_w += y * math.log1p(dl) - lam * dl
    return np.exp(log_w)
