"""Exact perfect matching and short cycle counts for lifted multigraphs.

Graphs here are plain ``(num_vertices, edge_list)`` pairs; parallel edges
are distinct edges and are counted separately.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np

from .laplace import BudgetExceeded

_INT64_SAFE = float(2**60)
SMALL_GRAPH = 16  # below this the plain recursion beats the dynamic program


def _multiplicities(num_vertices: int, edges) -> list[dict[int, int]]:
    adj: list[dict[int, int]] = [defaultdict(int) for _ in range(num_vertices)]
    for u, v in edges:
        if u == v:
            raise ValueError(f"loop at vertex {u}")
        adj[u][v] += 1
        adj[v][u] += 1
    return [dict(a) for a in adj]


def _components(adj: list[dict[int, int]]) -> list[list[int]]:
    seen = [False] * len(adj)
    comps = []
    for s in range(len(adj)):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


def _greedy_order(adj, vertices, start) -> list[int]:
    """Grow an elimination order that keeps the frontier small."""
    processed: set[int] = set()
    frontier: set[int] = set()
    remaining = set(vertices)
    order = []
    while remaining:
        if frontier:
            best = min(frontier, key=lambda v: (
                sum(1 for u in adj[v] if u not in processed and u not in frontier),
                -sum(1 for u in adj[v] if u in processed), v))
        else:
            best = start if start in remaining else min(remaining)
        order.append(best)
        processed.add(best)
        remaining.discard(best)
        frontier.discard(best)
        frontier.update(u for u in adj[best] if u not in processed)
    return order


def _frontier_profile(adj, order) -> list[int]:
    processed: set[int] = set()
    frontier: set[int] = set()
    sizes = []
    for v in order:
        processed.add(v)
        frontier.discard(v)
        frontier.update(u for u in adj[v] if u not in processed)
        sizes.append(len(frontier))
    return sizes


def elimination_order(adj, vertices, tries: int = 8) -> tuple[list[int], int]:
    """Best of a few greedy orders by ``sum 2^frontier``; returns (order, max frontier)."""
    step = max(1, len(vertices) // tries)
    best = None
    for s in vertices[::step][:tries]:
        order = _greedy_order(adj, vertices, s)
        prof = _frontier_profile(adj, order)
        cost = sum(2.0**f for f in prof)
        if best is None or cost < best[0]:
            best = (cost, order, max(prof, default=0))
    return best[1], best[2]


def _count_component(adj, vertices, max_frontier: int) -> int:
    if len(vertices) % 2:
        return 0
    if len(vertices) == 0:
        return 1
    order, width = elimination_order(adj, vertices)
    if width > max_frontier:
        raise BudgetExceeded(2**width, 2**max_frontier)
    pos = {v: k for k, v in enumerate(order)}
    slot: dict[int, int] = {}
    free = list(range(63, -1, -1))
    masks = np.zeros(1, dtype=np.uint64)
    counts = np.ones(1, dtype=np.int64)
    exact = False  # switch to Python ints once int64 could overflow
    for v in order:
        later = [(u, m) for u, m in adj[v].items() if pos[u] > pos[v]]
        for u, _ in later:
            if u not in slot:
                if not free:
                    raise BudgetExceeded(2**64, 2**max_frontier)
                slot[u] = free.pop()
        if v in slot:
            bit = np.uint64(1) << np.uint64(slot[v])
            has = (masks & bit) != 0
            parts_m = [masks[has] ^ bit]
            parts_c = [counts[has]]
            mm, cc = masks[~has], counts[~has]
        else:
            parts_m, parts_c = [], []
            mm, cc = masks, counts
        if not exact:
            bound = float(np.sum(cc, dtype=float)) * sum(m for _, m in later) + float(
                np.sum(parts_c[0], dtype=float) if parts_c else 0.0)
            if bound > _INT64_SAFE:
                exact = True
                counts = counts.astype(object)
                cc = cc.astype(object)
                parts_c = [p.astype(object) for p in parts_c]
        for u, m in later:
            ub = np.uint64(1) << np.uint64(slot[u])
            ok = (mm & ub) == 0
            parts_m.append(mm[ok] | ub)
            parts_c.append(cc[ok] * m)
        if not parts_m:
            return 0
        masks = np.concatenate(parts_m)
        counts = np.concatenate(parts_c)
        if masks.size == 0:
            return 0
        o = np.argsort(masks, kind="stable")
        masks, counts = masks[o], counts[o]
        starts = np.flatnonzero(np.r_[True, masks[1:] != masks[:-1]])
        counts = np.add.reduceat(counts, starts)
        masks = masks[starts]
        if v in slot:
            free.append(slot.pop(v))
    assert masks.size == 1 and masks[0] == 0
    return int(counts[0])


def count_perfect_matchings(num_vertices: int, edges, max_frontier: int = 40) -> int:
    """Exact number of perfect matchings of a loop-free multigraph.

    Small graphs use plain recursion; larger ones go through
    :func:`count_perfect_matchings_dp`.
    """
    if num_vertices <= SMALL_GRAPH:
        return count_perfect_matchings_bruteforce(num_vertices, edges)
    return count_perfect_matchings_dp(num_vertices, edges, max_frontier)


def count_perfect_matchings_dp(num_vertices: int, edges, max_frontier: int = 40) -> int:
    """Components are counted separately.  Within a component the count is a
    dynamic program over a greedy elimination order whose state is the set
    of already-matched frontier vertices."""
    adj = _multiplicities(num_vertices, edges)
    total = 1
    for comp in _components(adj):
        total *= _count_component(adj, comp, max_frontier)
        if total == 0:
            return 0
    return total


def count_perfect_matchings_bruteforce(num_vertices: int, edges) -> int:
    """Reference counter: match the lowest free vertex in every possible way."""
    return _count_bitmask(_multiplicities(num_vertices, edges), num_vertices)


def _count_bitmask(adj, num_vertices: int) -> int:
    if num_vertices % 2:
        return 0

    def rec(free: int) -> int:
        if free == 0:
            return 1
        v = (free & -free).bit_length() - 1
        rest = free & ~(1 << v)
        return sum(m * rec(rest & ~(1 << u)) for u, m in adj[v].items() if rest >> u & 1)

    return rec((1 << num_vertices) - 1)


def permanent(B) -> int:
    """Permanent of a square integer matrix by inclusion-exclusion over column subsets."""
    B = [list(map(int, row)) for row in B]
    n = len(B)
    if n == 0:
        return 1
    total = 0
    for r in range(1, n + 1):
        sign = (-1) ** (n - r)
        for cols in itertools.combinations(range(n), r):
            total += sign * math.prod(sum(row[c] for c in cols) for row in B)
    return total


def count_k_cycles(num_vertices: int, edges, kmax: int) -> list[int]:
    """``[Z_2, ..., Z_kmax]``: cycles of each length, counted as subgraphs.

    A 2-cycle is a pair of parallel edges.  Longer cycles are found once per
    direction from their smallest vertex and weighted by the product of edge
    multiplicities.
    """
    if kmax > 12:
        raise BudgetExceeded(kmax, 12)
    adj = _multiplicities(num_vertices, edges)
    counts = [0] * (kmax + 1)
    for v in range(num_vertices):
        for u, m in adj[v].items():
            if u > v:
                counts[2] += m * (m - 1) // 2
    nbrs = [sorted(a.items()) for a in adj]
    for root in range(num_vertices):
        on_path = {root}

        def dfs(v, length, weight):
            for u, m in nbrs[v]:
                if u == root and length >= 3:
                    counts[length] += weight * m
                elif u > root and u not in on_path and length < kmax:
                    on_path.add(u)
                    dfs(u, length + 1, weight * m)
                    on_path.discard(u)

        dfs(root, 1, 1)
    for k in range(3, kmax + 1):
        counts[k] //= 2
    return counts[2:]
