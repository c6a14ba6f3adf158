"""Heuristic graph construction and 2-opt search for the order/degree problem."""

from odgolf.graph_core import (
    UNREACHABLE,
    DistanceMatrix,
    Graph,
    GraphMetrics,
    apsp,
    bfs_distances,
    count_cycles_through_edge,
    lower_bounds,
    metrics,
    parse_edge_list,
    serialize_edge_list,
)
from odgolf.errors import (
    DisconnectedGraphError,
    DuplicateEdgeError,
    GraphError,
    MissingEdgeError,
    NodeRangeError,
    ParseError,
    SelfLoopError,
)
from odgolf.seed_builder import create_base_graph, filler11, petersen
from odgolf.greedy import GrowConfig, add_edges, generate
from odgolf.importance import EdgeRank, rank_edges
from odgolf.two_opt import SearchConfig, SwapHistory, multiple_2opt, replay

__version__ = "0.1.0"

__all__ = [
    "UNREACHABLE",
    "DisconnectedGraphError",
    "DistanceMatrix",
    "DuplicateEdgeError",
    "EdgeRank",
    "Graph",
    "GraphError",
    "GraphMetrics",
    "GrowConfig",
    "MissingEdgeError",
    "NodeRangeError",
    "ParseError",
    "SearchConfig",
    "SelfLoopError",
    "SwapHistory",
    "add_edges",
    "apsp",
    "bfs_distances",
    "count_cycles_through_edge",
    "create_base_graph",
    "filler11",
    "generate",
    "lower_bounds",
    "metrics",
    "multiple_2opt",
    "parse_edge_list",
    "petersen",
    "rank_edges",
    "replay",
    "serialize_edge_list",
]
