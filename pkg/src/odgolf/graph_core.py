"""Graph representation, edge-list I/O and shortest-path metrics."""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, TextIO

import numpy as np

from odgolf import _kernels
from odgolf.errors import (
    DuplicateEdgeError,
    MissingEdgeError,
    NodeRangeError,
    ParseError,
    SelfLoopError,
    ValidationError,
)

UNREACHABLE = -1

Edge = tuple[int, int]


class Graph:
    """Simple undirected graph on nodes ``0..n-1`` with sorted adjacency lists."""

    __slots__ = ("n", "_adj", "_m")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise ValidationError(f"order must be non-negative, got {n}")
        self.n = n
        self._adj: list[list[int]] = [[] for _ in range(n)]
        self._m = 0
        for u, v in edges:
            self.add_edge(u, v)

    @property
    def adjacency(self) -> list[tuple[int, ...]]:
        return [tuple(a) for a in self._adj]

    @property
    def edge_count(self) -> int:
        return self._m

    def _check(self, u: int, v: int) -> None:
        for x in (u, v):
            if not 0 <= x < self.n:
                raise NodeRangeError(f"node {x} outside [0, {self.n})")
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")

    def has_edge(self, u: int, v: int) -> bool:
        if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
            self._check(u, v)
        row = self._adj[u]
        k = bisect.bisect_left(row, v)
        return k < len(row) and row[k] == v

    def add_edge(self, u: int, v: int) -> None:
        if self.has_edge(u, v):
            raise DuplicateEdgeError(f"edge {u}-{v} already present")
        bisect.insort(self._adj[u], v)
        bisect.insort(self._adj[v], u)
        self._m += 1

    def remove_edge(self, u: int, v: int) -> None:
        if not self.has_edge(u, v):
            raise MissingEdgeError(f"edge {u}-{v} not present")
        self._adj[u].remove(v)
        self._adj[v].remove(u)
        self._m -= 1

    def neighbors(self, u: int) -> tuple[int, ...]:
        return tuple(self._adj[u])

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self._adj), dtype=np.int64, count=self.n)

    def edges(self) -> list[Edge]:
        """Edges as (u, v) with u < v, in lexicographic order."""
        return [(u, v) for u, row in enumerate(self._adj) for v in row if u < v]

    def copy(self) -> Graph:
        g = Graph(self.n)
        g._adj = [list(a) for a in self._adj]
        g._m = self._m
        return g

    def to_arrays(self, capacity: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Padded neighbor table (unused slots -1) and degree vector, both int32."""
        lens = [len(a) for a in self._adj]
        top = max(lens, default=0)
        width = top if capacity is None else capacity
        if width < top:
            raise ValidationError(f"capacity {width} below max degree {top}")
        deg = np.array(lens, dtype=np.int32)
        flat = np.fromiter(itertools.chain.from_iterable(self._adj), dtype=np.int32, count=sum(lens))
        nbr = _kernels.pad_rows(flat, deg, max(width, 1))
        return nbr, deg

    @classmethod
    def from_arrays(cls, nbr: np.ndarray, deg: np.ndarray) -> Graph:
        g = cls(len(deg))
        g._adj = [sorted(int(x) for x in nbr[u, : deg[u]]) for u in range(len(deg))]
        g._m = int(deg.sum()) // 2
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"


@dataclass
class DistanceMatrix:
    """All-pairs hop distances; ``UNREACHABLE`` marks disconnected pairs."""

    dist: np.ndarray

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __getitem__(self, key):
        return self.dist[key]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return np.array_equal(self.dist, other.dist)


@dataclass(frozen=True)
class GraphMetrics:
    n: int
    diameter: int
    distance_sum: int  # over unordered reachable pairs
    pair_count: int  # reachable unordered pairs
    connected: bool
    degree_min: int
    degree_max: int

    @property
    def aspl_exact(self) -> Fraction:
        return Fraction(self.distance_sum, self.pair_count)

    @property
    def aspl(self) -> float:
        return self.distance_sum / self.pair_count

    def key(self) -> tuple[int, int]:
        """Lexicographic (diameter, distance sum) key; smaller is better at fixed n."""
        return self.diameter, self.distance_sum


def parse_edge_list(text: str | TextIO, n: int | None = None) -> Graph:
    """Read whitespace-separated ``u v`` pairs, one per line.

    Duplicate lines collapse into one edge. The order defaults to one more than
    the largest node id seen.
    """
    if not isinstance(text, str):
        text = text.read()
    pairs: list[Edge] = []
    top = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise ParseError(f"expected two node ids, got {len(fields)} fields", lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"non-integer token in {line.strip()!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError(f"negative node id in {line.strip()!r}", lineno)
        if u == v:
            raise SelfLoopError(f"line {lineno}: self-loop at node {u}")
        pairs.append((u, v))
        top = max(top, u, v)
    order = top + 1 if n is None else n
    if order <= top:
        raise NodeRangeError(f"node id {top} does not fit order {order}")
    g = Graph(order)
    for u, v in pairs:
        if not g.has_edge(u, v):
            g.add_edge(u, v)
    return g


def serialize_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    if not 0 <= source < g.n:
        raise NodeRangeError(f"source {source} outside [0, {g.n})")
    nbr, deg = g.to_arrays()
    out = np.empty(g.n, dtype=np.int32)
    _kernels.bfs_row(nbr, deg, source, out, np.empty(g.n, dtype=np.int32))
    return out


def apsp(g: Graph) -> DistanceMatrix:
    nbr, deg = g.to_arrays()
    return DistanceMatrix(_kernels.apsp(nbr, deg))


def metrics(dm: DistanceMatrix) -> GraphMetrics:
    n = dm.n
    if n < 2:
        raise ValidationError("ASPL is undefined for fewer than two nodes")
    upper = dm.dist[np.triu_indices(n, k=1)].astype(np.int64)
    reach = upper != UNREACHABLE
    degrees = (dm.dist == 1).sum(axis=1)
    return GraphMetrics(
        n=n,
        diameter=int(upper[reach].max(initial=0)),
        distance_sum=int(upper[reach].sum()),
        pair_count=int(reach.sum()),
        connected=bool(reach.all()),
        degree_min=int(degrees.min()),
        degree_max=int(degrees.max()),
    )


def graph_metrics(g: Graph) -> GraphMetrics:
    return metrics(apsp(g))


def lower_bounds(n: int, d: int) -> tuple[int, Fraction]:
    """Moore-style bounds on diameter and ASPL for order n and degree d.

    Distance shell m holds at most d(d-1)^(m-1) nodes; shells are filled
    greedily from the nearest.
    """
    if n < 2 or d < 2:
        raise ValidationError(f"lower bounds need n >= 2 and d >= 2, got n={n}, d={d}")
    remaining = n - 1
    total = 0
    shell = 0
    capacity = d
    while remaining > 0:
        shell += 1
        take = min(capacity, remaining)
        total += shell * take
        remaining -= take
        capacity *= d - 1
    return shell, Fraction(total, n - 1)


def count_cycles_through_edge(g: Graph, u: int, v: int, length: int) -> int:
    """Number of simple cycles of `length` nodes that use edge u-v."""
    if not g.has_edge(u, v):
        raise MissingEdgeError(f"edge {u}-{v} not present")
    if length < 3:
        raise ValidationError("cycles have at least three nodes")
    # simple paths v -> u with length-1 edges, avoiding the edge itself
    on_path = {v}
    count = 0

    def walk(x: int, steps: int) -> None:
        nonlocal count
        for y in g.neighbors(x):
            if steps == 1:
                if y == u and x != v:
                    count += 1
                continue
            if y == u or y in on_path:
                continue
            on_path.add(y)
            walk(y, steps - 1)
            on_path.discard(y)

    walk(v, length - 1)
    return count
