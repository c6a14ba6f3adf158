"""Greedy pentagon-seeking edge insertion on top of the base graph."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from odgolf import _kernels
from odgolf.errors import DisconnectedGraphError, ValidationError
from odgolf.graph_core import DistanceMatrix, Graph, apsp
from odgolf.seed_builder import create_base_graph

log = logging.getLogger(__name__)


class DegreeDeficitWarning(UserWarning):
    """Some nodes could not be brought up to the target degree."""


@dataclass(frozen=True)
class GrowConfig:
    tie_break: str = "lowest-id"  # or "seeded"
    seed: int = 0
    recompute_every: int = 64  # insertions between distance refreshes; 0 disables

    def __post_init__(self):
        if self.tie_break not in ("lowest-id", "seeded"):
            raise ValidationError(f"unknown tie-break mode {self.tie_break!r}")
        if self.recompute_every < 0:
            raise ValidationError("recompute_every must be >= 0")

    def priority(self, n: int) -> np.ndarray:
        """Tie-break rank per node; the lowest value wins."""
        if self.tie_break == "lowest-id":
            return np.arange(n, dtype=np.int64)
        return np.random.default_rng(self.seed).permutation(n).astype(np.int64)


@dataclass
class GrowResult:
    graph: Graph
    dist: DistanceMatrix
    added: list[tuple[int, int]]
    added_distance: list[int]  # pre-insertion distance of each main-loop edge
    filled: list[tuple[int, int]] = field(default_factory=list)
    deficient: list[int] = field(default_factory=list)


def count_paths(dm: DistanceMatrix, g: Graph, i: int, j: int) -> int:
    """|D1(i) & D2(j)| + |D2(i) & D1(j)| where Dm(x) is the distance-m shell of x."""
    if i == j:
        raise ValidationError("count_paths needs two distinct nodes")
    di, dj = dm.dist[i], dm.dist[j]
    return int(np.count_nonzero((di == 1) & (dj == 2)) + np.count_nonzero((di == 2) & (dj == 1)))


def select_target(
    g: Graph,
    dm: DistanceMatrix,
    i: int,
    degree_cap: int,
    priority: Sequence[int] | None = None,
) -> int | None:
    """Partner for i among nodes more than two hops away with spare degree.

    Minimizes the path count to i, then maximizes the best path count among the
    candidate's neighbors, then takes the lowest priority (node id by default).
    """
    nbr, deg = g.to_arrays()
    prio = np.arange(g.n, dtype=np.int64) if priority is None else np.asarray(priority, np.int64)
    cp = np.empty(g.n, dtype=np.int64)
    j = _kernels.select_target(nbr, deg, dm.dist, i, degree_cap, prio, cp)
    return None if j < 0 else int(j)


def _check_start(g0: Graph, d: int) -> None:
    if g0.n and int(g0.degrees().max()) > d:
        raise ValidationError(f"base graph max degree {int(g0.degrees().max())} exceeds d={d}")


def final_fill(
    g: Graph, d: int, dm: DistanceMatrix | None = None
) -> tuple[Graph, list[tuple[int, int]], list[int]]:
    """Pair up nodes still below degree d (in place).

    Pairs more than two hops apart are used first, then any non-adjacent pair,
    lowest ids first. Returns the graph, the added edges and any nodes left
    short, which are also reported through ``DegreeDeficitWarning``.
    """
    _check_start(g, d)
    nbr, deg = g.to_arrays(capacity=max(d, 1))
    dist = apsp(g).dist if dm is None else dm.dist
    added = []
    while True:
        short = [int(v) for v in np.flatnonzero(deg < d)]
        pick = None
        for far_only in (True, False):
            for a, u in enumerate(short):
                for v in short[a + 1 :]:
                    if _kernels.has_edge(nbr, deg, u, v):
                        continue
                    if far_only and not (dist[u, v] > 2 or dist[u, v] < 0):
                        continue
                    pick = (u, v)
                    break
                if pick:
                    break
            if pick:
                break
        if pick is None:
            break
        u, v = pick
        if dist[u, v] < 0:
            _kernels.add_edge(nbr, deg, u, v)
            dist = _kernels.apsp(nbr, deg)
        else:
            _kernels.insert_and_relax(nbr, deg, dist, u, v)
        g.add_edge(u, v)
        added.append(pick)
    left = [int(v) for v in np.flatnonzero(deg < d)]
    if left:
        warnings.warn(
            f"{len(left)} node(s) left below degree {d}: {left[:10]}",
            DegreeDeficitWarning,
            stacklevel=2,
        )
    if dm is not None:
        dm.dist = dist
    return g, added, left


def grow(g0: Graph, d: int, cfg: GrowConfig = GrowConfig()) -> GrowResult:
    """Run the greedy insertion loop and the final fill; `g0` is left untouched."""
    _check_start(g0, d)
    nbr, deg = g0.to_arrays(capacity=max(d, 1))
    dist = _kernels.apsp(nbr, deg)
    if g0.n and (dist[0] < 0).any():
        raise DisconnectedGraphError("base graph must be connected")
    budget = max(0, (d * g0.n) // 2 - g0.edge_count)
    out_u = np.empty(budget, dtype=np.int32)
    out_v = np.empty(budget, dtype=np.int32)
    out_d = np.empty(budget, dtype=np.int32)
    count = _kernels.grow(
        nbr, deg, dist, d, cfg.priority(g0.n), cfg.recompute_every, out_u, out_v, out_d
    )
    log.debug("greedy loop added %d edges", count)
    g = Graph.from_arrays(nbr, deg)
    dm = DistanceMatrix(dist)
    g, filled, left = final_fill(g, d, dm)
    return GrowResult(
        graph=g,
        dist=dm,
        added=list(zip(out_u[:count].tolist(), out_v[:count].tolist())),
        added_distance=out_d[:count].tolist(),
        filled=filled,
        deficient=left,
    )


def add_edges(g0: Graph, n: int, d: int, cfg: GrowConfig = GrowConfig()) -> Graph:
    if g0.n != n:
        raise ValidationError(f"base graph has order {g0.n}, expected {n}")
    return grow(g0, d, cfg).graph


def generate(
    n: int, d: int, cfg: GrowConfig = GrowConfig(), matching: Sequence[int] | str = "offset5"
) -> Graph:
    """Base graph of order n grown greedily to degree d."""
    return add_edges(create_base_graph(n, matching), n, d, cfg)
