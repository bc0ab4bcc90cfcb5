"""Random n-lifts, exhaustive lift enumeration and Monte Carlo moment estimates."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .counting import count_k_cycles, count_perfect_matchings
from .graph import Multigraph
from .laplace import BudgetExceeded


def fiber_rng(seed: int, trial: int, edge: int) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, trial, edge)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0, trial, edge))))


@dataclass(frozen=True)
class Lift:
    """An n-lift of ``G``; vertex ``(i, a)`` is numbered ``i * n + a``.

    ``perms[e][a] = b`` puts the edge ``(i, a) -- (j, b)`` in fiber ``e = (i, j)``.
    """

    G: Multigraph
    n: int
    perms: tuple[tuple[int, ...], ...]

    @property
    def num_vertices(self) -> int:
        return self.G.g * self.n

    @property
    def edges(self) -> list[tuple[int, int]]:
        n = self.n
        out = []
        for (i, j), p in zip(self.G.edges, self.perms):
            out.extend((i * n + a, j * n + b) for a, b in enumerate(p))
        return out

    def degrees(self) -> list[int]:
        deg = [0] * self.num_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def check(self) -> None:
        expected = [self.G.degrees[i] for i in range(self.G.g) for _ in range(self.n)]
        if self.degrees() != expected:
            raise AssertionError("lift degrees differ from base degrees")
        if len(self.edges) != self.G.h * self.n:
            raise AssertionError("lift has the wrong number of edges")


def sample_lift(G: Multigraph, n: int, seed: int, trial: int = 0) -> Lift:
    if n < 1:
        raise ValueError("n must be positive")
    perms = tuple(tuple(int(x) for x in fiber_rng(seed, trial, e).permutation(n))
                  for e in range(G.h))
    return Lift(G, n, perms)


def all_lifts(G: Multigraph, n: int):
    for perms in itertools.product(itertools.permutations(range(n)), repeat=G.h):
        yield Lift(G, n, perms)


def spanning_tree_edges(G: Multigraph) -> list[int]:
    seen = {0}
    tree = []
    queue = [0]
    while queue:
        v = queue.pop(0)
        for e in G.incident[v]:
            u = G.other_end(e, v)
            if u not in seen:
                seen.add(u)
                tree.append(e)
                queue.append(u)
    return tree


def tree_reduced_lifts(G: Multigraph, n: int):
    """One lift per isomorphism class under relabelling each fiber.

    Relabelling the vertices above a tree child turns the tree edge into the
    identity matching and permutes the remaining fibers bijectively, so these
    ``(n!)^(h-g+1)`` lifts carry the same averages as the full list.
    """
    tree = set(spanning_tree_edges(G))
    free = [e for e in range(G.h) if e not in tree]
    ident = tuple(range(n))
    for chosen in itertools.product(itertools.permutations(range(n)), repeat=len(free)):
        perms = [ident] * G.h
        for e, p in zip(free, chosen):
            perms[e] = p
        yield Lift(G, n, tuple(perms))


@dataclass
class OracleMoments:
    n: int
    lifts: int
    EX: Fraction
    EX2: Fraction
    EZ: list[Fraction]
    EXZ: list[Fraction]


def exhaustive_lift_oracle(G: Multigraph, n: int, kmax: int = 0, cap: int = 10**6,
                           reduce: bool = True) -> OracleMoments:
    """Exact averages over all ``(n!)^h`` lifts.

    With ``reduce`` only the spanning-tree representatives are visited; the
    averages are identical.
    """
    if (math.factorial(n) ** G.h) > cap:
        raise BudgetExceeded(math.factorial(n) ** G.h, cap)
    total = math.factorial(n) ** (G.h - G.g + 1 if reduce else G.h)
    sx = sx2 = 0
    sz = [0] * max(0, kmax - 1)
    sxz = [0] * max(0, kmax - 1)
    for lift in (tree_reduced_lifts(G, n) if reduce else all_lifts(G, n)):
        edges = lift.edges
        x = count_perfect_matchings(lift.num_vertices, edges)
        sx += x
        sx2 += x * x
        if kmax >= 2:
            for k, z in enumerate(count_k_cycles(lift.num_vertices, edges, kmax)):
                sz[k] += z
                sxz[k] += x * z
    return OracleMoments(n, total, Fraction(sx, total), Fraction(sx2, total),
                         [Fraction(v, total) for v in sz], [Fraction(v, total) for v in sxz])


@dataclass
class Estimate:
    value: float
    se: float
    target: float | None = None

    @property
    def z(self) -> float | None:
        if self.target is None:
            return None
        if self.se == 0:
            return 0.0 if self.value == self.target else math.inf
        return (self.value - self.target) / self.se

    def within(self, k: float = 3.0) -> bool:
        return self.z is not None and abs(self.z) <= k

    def to_dict(self) -> dict:
        out = {"value": f"{self.value:.12g}", "se": f"{self.se:.6g}"}
        if self.target is not None:
            out["target"] = f"{self.target:.12g}"
            out["z"] = f"{self.z:.4f}"
        return out


def mean_estimate(x: np.ndarray, target=None) -> Estimate:
    x = np.asarray(x, dtype=float)
    return Estimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), target)


def variance_estimate(x: np.ndarray, target=None) -> Estimate:
    """Sample variance with its large-sample standard error."""
    x = np.asarray(x, dtype=float)
    T = x.size
    s2 = float(x.var(ddof=1))
    m4 = float(np.mean((x - x.mean()) ** 4))
    se = math.sqrt(max(m4 - (T - 3) / (T - 1) * s2 * s2, 0.0) / T)
    return Estimate(s2, se, target)


def ratio_estimate(x: np.ndarray, z: np.ndarray, target=None) -> Estimate:
    """``sum(x z) / sum(x)`` with a delta-method standard error."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    mx = x.mean()
    r = float((x * z).mean() / mx)
    resid = x * (z - r)
    se = float(resid.std(ddof=1) / math.sqrt(x.size) / mx)
    return Estimate(r, se, target)


@dataclass
class SimReport:
    graph: str
    n: int
    trials: int
    seed: int
    kmax: int
    X: list[int]
    Z: list[list[int]]
    EX: Estimate
    EX2: Estimate
    EZ: dict[int, Estimate] = field(default_factory=dict)
    VarZ: dict[int, Estimate] = field(default_factory=dict)
    XZ_ratio: dict[int, Estimate] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph, "n": self.n, "trials": self.trials, "seed": self.seed,
            "kmax": self.kmax,
            "E[X]": self.EX.to_dict(), "E[X^2]": self.EX2.to_dict(),
            "E[Z_k]": {str(k): e.to_dict() for k, e in self.EZ.items()},
            "Var[Z_k]": {str(k): e.to_dict() for k, e in self.VarZ.items()},
            "E[X Z_k]/E[X]": {str(k): e.to_dict() for k, e in self.XZ_ratio.items()},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "X"] + [f"Z{k}" for k in range(2, self.kmax + 1)])
        for t, (x, zs) in enumerate(zip(self.X, self.Z)):
            w.writerow([t, x] + list(zs))
        return buf.getvalue()


def simulate_trial(G: Multigraph, n: int, kmax: int, seed: int, trial: int,
                   max_frontier: int = 40) -> tuple[int, list[int]]:
    lift = sample_lift(G, n, seed, trial)
    lift.check()
    edges = lift.edges
    x = count_perfect_matchings(lift.num_vertices, edges, max_frontier=max_frontier)
    z = count_k_cycles(lift.num_vertices, edges, kmax) if kmax >= 2 else []
    return x, z


def monte_carlo_moments(G: Multigraph, n: int, trials: int, kmax: int, seed: int,
                        lam: dict[int, float] | None = None, mu: dict[int, float] | None = None,
                        max_frontier: int = 40, threads: int = 1) -> SimReport:
    """Sample ``trials`` lifts; count ``X`` and ``Z_2..Z_kmax`` exactly in each.

    ``lam`` and ``mu`` (keyed by ``k``) become the comparison targets for the
    cycle means/variances and the matching-weighted cycle means.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    results = run_trials(G, n, kmax, seed, trials, max_frontier, threads)
    X = [x for x, _ in results]
    Z = [z for _, z in results]
    xs = np.array([float(v) for v in X])
    za = np.array(Z, dtype=float).reshape(trials, max(0, kmax - 1))
    lam = lam or {}
    mu = mu or {}
    rep = SimReport(G.name, n, trials, seed, kmax, X, Z,
                    mean_estimate(xs), mean_estimate(xs**2))
    for col, k in enumerate(range(2, kmax + 1)):
        rep.EZ[k] = mean_estimate(za[:, col], lam.get(k))
        rep.VarZ[k] = variance_estimate(za[:, col], lam.get(k))
        if xs.sum() > 0:
            rep.XZ_ratio[k] = ratio_estimate(xs, za[:, col], mu.get(k))
    return rep


def _trial_job(args):
    return simulate_trial(*args)


def run_trials(G: Multigraph, n: int, kmax: int, seed: int, trials: int,
               max_frontier: int = 40, threads: int = 1) -> list[tuple[int, list[int]]]:
    """Per-trial ``(X, Z)`` in trial order, optionally spread over processes."""
    jobs = [(G, n, kmax, seed, t, max_frontier) for t in range(trials)]
    if threads <= 1:
        return [_trial_job(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(threads) as ex:
        return list(ex.map(_trial_job, jobs, chunksize=max(1, trials // (4 * threads))))


def compare_with_limit(X, EX: float, W: np.ndarray, alpha: float = 0.001) -> dict:
    """Two-sample Kolmogorov-Smirnov comparison of ``X / E[X]`` with draws of ``W``.

    Finite-n laws are only expected to be close to the limit, so this is a
    loose consistency check rather than a test of the limit itself.
    """
    from scipy.stats import ks_2samp

    ratio = np.array([float(x) for x in X]) / EX
    res = ks_2samp(ratio, W)
    n, m = ratio.size, W.size
    crit = math.sqrt(-0.5 * math.log(alpha / 2)) * math.sqrt((n + m) / (n * m))
    return {"statistic": float(res.statistic), "pvalue": float(res.pvalue), "critical": crit,
            "alpha": alpha, "pass": bool(res.statistic < crit), "heuristic": True,
            "mean_ratio": float(ratio.mean()), "mean_W": float(W.mean())}
