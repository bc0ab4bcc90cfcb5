"""Loop-free multigraphs and the matrices built from them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph input (loops, bad indices, disconnected)."""


@dataclass(frozen=True)
class Multigraph:
    """Connected multigraph on vertices ``0..g-1`` without loops.

    ``edges`` keeps document order; edge ``k`` is stored as the pair
    ``(i, j)`` and that order doubles as the edge orientation used by the
    directed incidence matrix.
    """

    g: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.g < 1:
            raise GraphError(f"vertex count must be positive, got {self.g}")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        for k, (i, j) in enumerate(edges):
            if not (0 <= i < self.g and 0 <= j < self.g):
                raise GraphError(f"edge {k} = {(i, j)} has a vertex outside 0..{self.g - 1}")
            if i == j:
                raise GraphError(f"edge {k} is a loop at vertex {i}")
        if not _connected(self.g, edges):
            raise GraphError("graph is not connected")

    @property
    def h(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.g
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices incident to each vertex, in increasing order."""
        inc: list[list[int]] = [[] for _ in range(self.g)]
        for k, (i, j) in enumerate(self.edges):
            inc[i].append(k)
            inc[j].append(k)
        return tuple(tuple(x) for x in inc)

    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else ``None``."""
        deg = set(self.degrees)
        return deg.pop() if len(deg) == 1 else None

    def other_end(self, edge: int, vertex: int) -> int:
        i, j = self.edges[edge]
        return j if vertex == i else i

    def to_dict(self) -> dict:
        return {"g": self.g, "edges": [list(e) for e in self.edges]}


def _connected(g: int, edges) -> bool:
    parent = list(range(g))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        parent[find(i)] = find(j)
    return len({find(v) for v in range(g)}) == 1


def load_graph(source) -> Multigraph:
    """Build a :class:`Multigraph` from a graph document.

    ``source`` may be a mapping with keys ``"g"`` and ``"edges"``, a JSON
    string, or a path to a JSON file.
    """
    name = ""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        name = path.stem
        source = path.read_text(encoding="utf-8")
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise GraphError(f"graph document is not valid JSON: {exc}") from exc
    if not isinstance(source, dict) or "g" not in source or "edges" not in source:
        raise GraphError('graph document needs keys "g" and "edges"')
    g = source["g"]
    if not isinstance(g, int) or isinstance(g, bool):
        raise GraphError(f'"g" must be an integer, got {g!r}')
    edges = []
    for k, pair in enumerate(source["edges"]):
        if len(pair) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair):
            raise GraphError(f"edge {k} must be a pair of integers, got {pair!r}")
        edges.append(tuple(pair))
    return Multigraph(g, tuple(edges), name=source.get("name", name))


@dataclass(frozen=True)
class GraphMatrices:
    A: np.ndarray
    Ahat: np.ndarray
    Adir: np.ndarray
    D: np.ndarray
    alphas: tuple[float, ...]


def build_matrices(G: Multigraph) -> GraphMatrices:
    """Adjacency, incidence, directed incidence, degree matrix and spectrum of A."""
    g, h = G.g, G.h
    A = np.zeros((g, g), dtype=np.int64)
    Ahat = np.zeros((g, h), dtype=np.int64)
    Adir = np.zeros((g, h), dtype=np.int64)
    for k, (i, j) in enumerate(G.edges):
        A[i, j] += 1
        A[j, i] += 1
        Ahat[i, k] = Ahat[j, k] = 1
        Adir[i, k] = 1
        Adir[j, k] = -1
    D = np.diag(np.array(G.degrees, dtype=np.int64))
    # both identities are exact in integer arithmetic
    assert np.array_equal(Ahat @ Ahat.T, A + D)
    assert np.array_equal(Adir @ Adir.T, D - A)
    alphas = tuple(symmetric_eigenvalues(A))
    return GraphMatrices(A=A, Ahat=Ahat, Adir=Adir, D=D, alphas=alphas)


def is_bipartite(G: Multigraph) -> tuple[bool, tuple[frozenset, frozenset] | None]:
    """Two-colour ``G`` by BFS; returns ``(True, (side0, side1))`` or ``(False, None)``."""
    colour = [-1] * G.g
    colour[0] = 0
    queue = [0]
    nbrs: list[list[int]] = [[] for _ in range(G.g)]
    for i, j in G.edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    while queue:
        v = queue.pop()
        for u in nbrs[v]:
            if colour[u] < 0:
                colour[u] = 1 - colour[v]
                queue.append(u)
            elif colour[u] == colour[v]:
                return False, None
    side0 = frozenset(v for v in range(G.g) if colour[v] == 0)
    side1 = frozenset(v for v in range(G.g) if colour[v] == 1)
    return True, (side0, side1)


def symmetric_eigenvalues(M) -> list[float]:
    """Eigenvalues of a real symmetric matrix, largest first."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    return sorted(np.linalg.eigvalsh(M).tolist(), reverse=True)


# -- named graphs used throughout tests and notebooks --------------------------

def complete_graph(k: int) -> Multigraph:
    edges = tuple((i, j) for i in range(k) for j in range(i + 1, k))
    return Multigraph(k, edges, name=f"K{k}")


def k4() -> Multigraph:
    return complete_graph(4)


def banana(d: int = 3) -> Multigraph:
    """Two vertices joined by ``d`` parallel edges."""
    return Multigraph(2, tuple((0, 1) for _ in range(d)), name=f"K2^{d}")


def cycle_graph(k: int) -> Multigraph:
    return Multigraph(k, tuple((i, (i + 1) % k) for i in range(k)), name=f"C{k}")


def path_graph(k: int) -> Multigraph:
    return Multigraph(k, tuple((i, i + 1) for i in range(k - 1)), name=f"P{k}")


def petersen() -> Multigraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Multigraph(10, tuple(outer + spokes + inner), name="Petersen")


def prism3() -> Multigraph:
    """The triangular prism K3 x K2."""
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]
    return Multigraph(6, tuple(edges), name="prism3")


def cube() -> Multigraph:
    edges = [(a, a ^ (1 << b)) for a in range(8) for b in range(3) if a < a ^ (1 << b)]
    return Multigraph(8, tuple(edges), name="Q3")
