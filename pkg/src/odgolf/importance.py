"""Edge importance: how much each edge carries shortest paths, for 2-opt ordering.

For a source i and an edge j-k with d(i, j) + 1 = d(i, k), the edge is one of
|J| parent edges of k in the BFS layering from i and gets weight 1/|J|. Edges
joining equidistant nodes get 0. The importance of an edge is the sum over all
sources.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from odgolf import _kernels
from odgolf.errors import DisconnectedGraphError, MissingEdgeError
from odgolf.graph_core import DistanceMatrix, Edge, Graph, apsp


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def f1(dm: DistanceMatrix, g: Graph, i: int, j: int, k: int) -> float:
    """Share of edge j-k in the shortest paths from i to its farther endpoint."""
    if not g.has_edge(j, k):
        raise MissingEdgeError(f"edge {j}-{k} not present")
    dj, dk = int(dm.dist[i, j]), int(dm.dist[i, k])
    if dj == dk:
        return 0.0
    assert abs(dj - dk) == 1, "endpoints of an edge differ by at most one hop"
    near_d, far = (dj, k) if dj < dk else (dk, j)
    parents = sum(1 for x in g.neighbors(far) if dm.dist[i, x] == near_d)
    assert parents >= 1
    return 1.0 / parents


def _from_histogram(hist: np.ndarray) -> np.ndarray:
    # fixed summation order: equal histograms give bit-identical floats
    total = np.zeros(hist.shape[0], dtype=np.float64)
    for c in range(1, hist.shape[1]):
        total += hist[:, c] / c
    return total


def _histograms(g: Graph, dm: DistanceMatrix, edges: list[Edge]) -> np.ndarray:
    nbr, deg = g.to_arrays()
    eu = np.array([e[0] for e in edges], dtype=np.int32)
    ev = np.array([e[1] for e in edges], dtype=np.int32)
    width = int(deg.max(initial=0)) + 1
    return _kernels.importance_histogram(nbr, deg, dm.dist, eu, ev, width)


def importance(dm: DistanceMatrix, g: Graph, edge: Edge) -> float:
    """Sum of f1 over every node, including both endpoints."""
    u, v = edge
    if not g.has_edge(u, v):
        raise MissingEdgeError(f"edge {u}-{v} not present")
    return float(_from_histogram(_histograms(g, dm, [_norm(u, v)]))[0])


def importance_exact(dm: DistanceMatrix, g: Graph, edge: Edge) -> Fraction:
    u, v = edge
    if not g.has_edge(u, v):
        raise MissingEdgeError(f"edge {u}-{v} not present")
    hist = _histograms(g, dm, [_norm(u, v)])[0]
    return sum((Fraction(int(cnt), c) for c, cnt in enumerate(hist) if c), Fraction(0))


@dataclass
class EdgeRank:
    """Edges in ascending importance order; ties go to the smaller (u, v)."""

    edges: list[Edge]
    importances: list[float]
    index: dict[Edge, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {e: r for r, e in enumerate(self.edges)}

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(zip(self.edges, self.importances))

    def rank_of(self, u: int, v: int) -> int:
        return self.index[_norm(u, v)]


def rank_edges(g: Graph, dm: DistanceMatrix | None = None) -> EdgeRank:
    if dm is None:
        dm = apsp(g)
    if g.n and (dm.dist < 0).any():
        raise DisconnectedGraphError("edge importance needs a connected graph")
    edges = g.edges()
    if not edges:
        return EdgeRank([], [])
    values = _from_histogram(_histograms(g, dm, edges))
    eu = np.array([e[0] for e in edges])
    ev = np.array([e[1] for e in edges])
    order = np.lexsort((ev, eu, values))
    return EdgeRank([edges[k] for k in order], [float(values[k]) for k in order])
