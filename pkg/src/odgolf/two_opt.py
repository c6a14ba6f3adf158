"""Importance-ordered 2-opt edge-swap search over (diameter, ASPL).

A swap removes edges a-b and c-d and adds either a-c, b-d ("AC_BD") or a-d, b-c
("AD_BC"), so every degree is preserved. Candidate pairs are visited in rank
order of edge importance. The distance matrix is kept in sync incrementally:
only sources whose BFS layering depends on a removed edge, or that can be
shortcut by an added edge, are recomputed.
"""

from __future__ import annotations

import csv
import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from odgolf import _kernels
from odgolf.errors import DisconnectedGraphError, MissingEdgeError, ValidationError
from odgolf.graph_core import DistanceMatrix, Edge, Graph, GraphMetrics, apsp, metrics
from odgolf.importance import rank_edges

log = logging.getLogger(__name__)

AC_BD = "AC_BD"
AD_BC = "AD_BC"
VARIANTS = (AC_BD, AD_BC)
ORDERINGS = ("smallest_first", "triangle")

HISTORY_HEADER = (
    "step", "aspl_before", "aspl_after", "diameter_after",
    "rank_i", "rank_j", "variant", "accepted_worse",
)


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SwapProposal:
    e1: Edge  # a-b
    e2: Edge  # c-d
    variant: str

    @property
    def removed(self) -> tuple[Edge, Edge]:
        return self.e1, self.e2

    @property
    def added(self) -> tuple[Edge, Edge]:
        (a, b), (c, d) = self.e1, self.e2
        if self.variant == AC_BD:
            return _norm(a, c), _norm(b, d)
        return _norm(a, d), _norm(b, c)

    def inverse(self) -> tuple[Edge, Edge, Edge, Edge]:
        return (*self.added, *self.removed)


@dataclass(frozen=True)
class SearchConfig:
    ordering: str = "smallest_first"
    acceptance: str = "strict"  # or "threshold"
    epsilon: float = 0.0  # max ASPL increase for a worse move (threshold mode)
    timeout: float = 60.0  # wall-clock seconds
    rerank_cadence: int = 50  # accepted swaps between importance recomputations
    seed: int = 0
    worse_window: int | None = None  # evaluations without acceptance before a worse move
    restart_after: int = 3  # rounds without a new best before returning to it
    max_evaluations: int | None = None
    restart_on_improve: bool = False  # after an improving swap, rescan from pair (0, 1)
    chunk: int = 4096  # evaluations between clock checks
    verify: bool = False  # compare the maintained matrix with a full recompute after each swap

    def __post_init__(self):
        if self.ordering not in ORDERINGS:
            raise ValidationError(f"unknown ordering {self.ordering!r}")
        if self.acceptance not in ("strict", "threshold"):
            raise ValidationError(f"unknown acceptance {self.acceptance!r}")
        if self.timeout <= 0:
            raise ValidationError("timeout must be positive")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be non-negative")
        if self.rerank_cadence < 1:
            raise ValidationError("rerank_cadence must be >= 1")
        if self.worse_window is not None and self.worse_window < 0:
            raise ValidationError("worse_window must be >= 0")
        if self.restart_after < 1:
            raise ValidationError("restart_after must be >= 1")


def parse_acceptance(text: str) -> tuple[str, float]:
    """``strict`` or ``threshold=EPS``."""
    if text == "strict":
        return "strict", 0.0
    if text.startswith("threshold="):
        try:
            eps = float(text.split("=", 1)[1])
        except ValueError:
            raise ValidationError(f"bad threshold in {text!r}") from None
        return "threshold", eps
    raise ValidationError(f"acceptance must be 'strict' or 'threshold=EPS', got {text!r}")


@dataclass(frozen=True)
class SwapRecord:
    step: int
    aspl_before: float
    aspl_after: float
    diameter_after: int
    rank_i: int
    rank_j: int
    variant: str
    accepted_worse: bool
    proposal: SwapProposal


@dataclass
class SwapHistory:
    records: list[SwapRecord] = field(default_factory=list)
    # (after_step, back_to_step): the search returned to the graph as of back_to_step
    restores: list[tuple[int, int]] = field(default_factory=list)
    best_step: int = 0
    evaluations: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def rows(self) -> Iterator[tuple]:
        for r in self.records:
            yield (
                r.step, f"{r.aspl_before:.9f}", f"{r.aspl_after:.9f}", r.diameter_after,
                r.rank_i, r.rank_j, r.variant, int(r.accepted_worse),
            )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HISTORY_HEADER)
            w.writerows(self.rows())

    def rank_quantile(self, q: float) -> int:
        """Smallest r such that a fraction q of swapped edges have rank < r."""
        ranks = sorted(x for r in self.records for x in (r.rank_i, r.rank_j))
        if not ranks:
            return 0
        k = int(np.ceil(q * len(ranks)))
        return ranks[max(k - 1, 0)] + 1


def pair_sequence(ordering: str, m: int) -> Iterator[tuple[int, int]]:
    """Rank-index pairs (i, j), i < j, in search order."""
    if m < 2:
        raise ValidationError("pair sequence needs at least two edges")
    if ordering == "smallest_first":
        for i in range(m - 1):
            for j in range(i + 1, m):
                yield i, j
    elif ordering == "triangle":
        for j in range(1, m):
            for i in range(j):
                yield i, j
    else:
        raise ValidationError(f"unknown ordering {ordering!r}")


def propose(g: Graph, e1: Edge, e2: Edge) -> list[SwapProposal]:
    """The valid rewirings of e1 = a-b and e2 = c-d."""
    (a, b), (c, d) = e1, e2
    for u, v in (e1, e2):
        if not g.has_edge(u, v):
            raise MissingEdgeError(f"edge {u}-{v} not present")
    if len({a, b, c, d}) < 4:
        return []
    out = []
    if not g.has_edge(a, c) and not g.has_edge(b, d):
        out.append(SwapProposal(e1, e2, AC_BD))
    if not g.has_edge(a, d) and not g.has_edge(b, c):
        out.append(SwapProposal(e1, e2, AD_BC))
    return out


def _swap_arrays(p: SwapProposal) -> tuple[np.ndarray, np.ndarray]:
    return np.array(p.removed, dtype=np.int32), np.array(p.added, dtype=np.int32)


def apply_swap(g: Graph, p: SwapProposal) -> Graph:
    h = g.copy()
    for u, v in p.removed:
        h.remove_edge(u, v)
    for u, v in p.added:
        h.add_edge(u, v)
    return h


def apply_swap_incremental(
    g: Graph, dm: DistanceMatrix, p: SwapProposal
) -> tuple[Graph, DistanceMatrix]:
    """Swapped graph and its distance matrix, recomputing only affected rows.

    If the swap disconnects the graph the returned matrix carries UNREACHABLE
    entries; callers are expected to reject such swaps.
    """
    (a, b), (c, d) = p.removed
    for u, v in p.removed:
        if not g.has_edge(u, v):
            raise MissingEdgeError(f"edge {u}-{v} not present")
    if p.variant not in (AC_BD, AD_BC) or len({a, b, c, d}) < 4 or any(g.has_edge(u, v) for u, v in p.added):
        raise ValidationError(f"invalid proposal {p}")
    nbr, deg = g.to_arrays()
    dist = dm.dist.copy()
    removed, added = _swap_arrays(p)
    _kernels.swap_distances(nbr, deg, dist, removed, added)
    return apply_swap(g, p), DistanceMatrix(dist)


def accept(current: GraphMetrics, candidate: GraphMetrics, cfg: SearchConfig) -> bool:
    """Whether the candidate may replace the current graph.

    Strict: smaller diameter, or equal diameter and smaller ASPL. Threshold mode
    also admits equal-diameter candidates whose ASPL grows by at most epsilon;
    how often that happens is rationed by the search loop.
    """
    if not candidate.connected:
        return False
    if candidate.diameter != current.diameter:
        return candidate.diameter < current.diameter
    delta = candidate.aspl_exact - current.aspl_exact
    if delta < 0:
        return True
    return cfg.acceptance == "threshold" and delta <= Fraction(cfg.epsilon)


class _State:
    """Mutable search state: arrays, distances and rank slots."""

    def __init__(self, g: Graph):
        self.n = g.n
        self.removed = np.empty((2, 2), dtype=np.int32)
        self.added = np.empty((2, 2), dtype=np.int32)
        self.work = np.empty((3, (self.n + 63) // 64), dtype=np.uint64)
        self.dirty = np.zeros(self.n, dtype=np.int8)
        self.reset_to(*g.to_arrays())

    @property
    def pairs(self) -> int:
        return self.n * (self.n - 1)

    def aspl(self, total: int | None = None) -> float:
        return (self.total if total is None else total) / self.pairs

    def graph(self) -> Graph:
        return Graph.from_arrays(self.nbr, self.deg)

    def rerank(self) -> None:
        rank = rank_edges(self.graph(), DistanceMatrix(self.dist))
        self.su = np.array([e[0] for e in rank.edges], dtype=np.int32)
        self.sv = np.array([e[1] for e in rank.edges], dtype=np.int32)

    def reset_to(self, nbr: np.ndarray, deg: np.ndarray) -> None:
        self.nbr = nbr.copy()
        self.deg = deg.copy()
        self.bits = _kernels.adjacency_bits(self.nbr, self.deg)
        self.dist = _kernels.apsp(self.nbr, self.deg)
        if (self.dist < 0).any():
            raise DisconnectedGraphError("2-opt search needs a connected graph")
        self.pc = _kernels.parent_counts(self.nbr, self.deg, self.dist)
        self.rowsum = self.dist.sum(axis=1, dtype=np.int64)
        self.ecc = self.dist.max(axis=1).astype(np.int32)
        self.diameter = int(self.ecc.max(initial=0))
        self.total = int(self.rowsum.sum())  # ordered pairs
        self.rerank()

    def commit(self, i: int, j: int, variant: int, diameter: int, total: int) -> SwapProposal:
        _kernels._build_variant(self.su, self.sv, i, j, variant, self.removed, self.added)
        _kernels.commit_swap(
            self.nbr, self.deg, self.bits, self.dist, self.pc, self.rowsum, self.ecc,
            self.removed, self.added,
        )
        p = SwapProposal(
            (int(self.su[i]), int(self.sv[i])), (int(self.su[j]), int(self.sv[j])),
            VARIANTS[variant],
        )
        # added edges inherit the rank slots of the removed ones
        (self.su[i], self.sv[i]), (self.su[j], self.sv[j]) = p.added
        self.diameter = diameter
        self.total = total
        return p


def multiple_2opt(g: Graph, cfg: SearchConfig = SearchConfig()) -> tuple[Graph, SwapHistory]:
    """Search from `g` until timeout, evaluation budget or (strict mode) convergence.

    Returns the best graph seen, which is never worse than `g`, and the history
    of accepted swaps.
    """
    started = time.monotonic()
    deadline = started + cfg.timeout
    st = _State(g)
    history = SwapHistory()
    m = len(st.su)
    if m < 2:
        return g.copy(), history
    rng = random.Random(cfg.seed)
    threshold = cfg.acceptance == "threshold"
    worse_slack = int(np.floor(Fraction(cfg.epsilon) * st.pairs)) if threshold else 0
    window = cfg.worse_window if cfg.worse_window is not None else m * (m - 1)
    triangle = cfg.ordering == "triangle"

    best_key = (st.diameter, st.total)
    best_arrays = (st.nbr.copy(), st.deg.copy())
    cursor = (0, 1)
    step = 0
    since_rank = 0
    since_accept = 0
    round_accepts = 0
    round_improved = False
    stale_rounds = 0

    def end_round(restart: bool) -> tuple[int, int]:
        nonlocal since_rank, round_accepts, round_improved, stale_rounds
        stale_rounds = 0 if round_improved else stale_rounds + 1
        round_accepts = 0
        round_improved = False
        if threshold and stale_rounds >= cfg.restart_after and (st.diameter, st.total) != best_key:
            st.reset_to(*best_arrays)
            history.restores.append((step, history.best_step))
            stale_rounds = 0
            since_rank = 0
            return rng.randrange(max(1, min(m - 1, 64))), 0
        if restart or since_rank:
            st.rerank()
            since_rank = 0
        return 0, 1

    while True:
        if time.monotonic() >= deadline:
            break
        budget = cfg.chunk
        if cfg.max_evaluations is not None:
            budget = min(budget, cfg.max_evaluations - history.evaluations)
            if budget <= 0:
                break
        worse_after = max(window - since_accept, 0) if threshold else -1
        i0, j0 = cursor
        if j0 <= i0:
            j0 = i0 + 1
        found, i, j, variant, diam, total, worse, evals, exhausted = _kernels.scan(
            st.bits, st.dist, st.pc, st.rowsum, st.ecc, st.su, st.sv, i0, j0, triangle,
            st.diameter, st.total, budget, worse_after, worse_slack,
            st.removed, st.added, st.work, st.dirty,
        )
        history.evaluations += int(evals)
        since_accept += int(evals)
        if found:
            before = st.aspl()
            p = st.commit(int(i), int(j), int(variant), int(diam), int(total))
            step += 1
            if cfg.verify:
                assert (st.dist == _kernels.apsp(st.nbr, st.deg)).all(), f"matrix drift at step {step}"
                assert (st.pc == _kernels.parent_counts(st.nbr, st.deg, st.dist)).all()
                assert st.total == int(st.dist.sum())
            history.records.append(SwapRecord(
                step, before, st.aspl(), st.diameter, int(i), int(j),
                p.variant, bool(worse), p,
            ))
            since_accept = 0
            since_rank += 1
            round_accepts += 1
            if (st.diameter, st.total) < best_key:
                best_key = (st.diameter, st.total)
                best_arrays = (st.nbr.copy(), st.deg.copy())
                history.best_step = step
                round_improved = True
            if since_rank >= cfg.rerank_cadence:
                cursor = end_round(restart=True)
            elif cfg.restart_on_improve and not worse:
                cursor = (0, 1)
            else:
                cursor = _kernels._next_pair(int(i), int(j), m, triangle)
                if _kernels._pair_done(cursor[0], cursor[1], m):
                    cursor = end_round(restart=False)
        elif exhausted:
            if not threshold and round_accepts == 0:
                break  # converged: a whole pass without improvement
            cursor = end_round(restart=False)
        else:
            cursor = (int(i), int(j))

    log.info(
        "2-opt: %d swaps, %d evaluations, best step %d, %.1fs",
        len(history), history.evaluations, history.best_step, time.monotonic() - started,
    )
    return Graph.from_arrays(*best_arrays), history


def replay(g: Graph, history: SwapHistory) -> Graph:
    """Re-apply the recorded swaps to `g`, returning the search's best graph."""
    h = g.copy()
    applied: list[SwapRecord] = []
    restores = sorted(history.restores)
    k = 0

    def undo_to(target: int) -> None:
        while applied and applied[-1].step > target:
            rec = applied.pop()
            for u, v in rec.proposal.added:
                h.remove_edge(u, v)
            for u, v in rec.proposal.removed:
                h.add_edge(u, v)

    for rec in history.records:
        while k < len(restores) and restores[k][0] < rec.step:
            undo_to(restores[k][1])
            k += 1
        for u, v in rec.proposal.removed:
            h.remove_edge(u, v)
        for u, v in rec.proposal.added:
            h.add_edge(u, v)
        applied.append(rec)
    while k < len(restores):
        undo_to(restores[k][1])
        k += 1
    undo_to(history.best_step)
    return h


def graph_key(g: Graph) -> tuple[int, int]:
    mt = metrics(apsp(g))
    if not mt.connected:
        raise DisconnectedGraphError("graph is disconnected")
    return mt.key()
