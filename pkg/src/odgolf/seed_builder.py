"""Base graph construction: a chain of Petersen blocks with 11-node fillers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from odgolf.errors import DuplicateEdgeError, ValidationError
from odgolf.graph_core import Graph

PETERSEN_SIZE = 10
FILLER_SIZE = 11
SPARE = 10

MATCHINGS: dict[str, tuple[int, ...]] = {
    "identity": tuple(range(10)),
    "offset5": tuple((i + 5) % 10 for i in range(10)),
}


def petersen_edges() -> list[tuple[int, int]]:
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))
        edges.append((i, (2 * i) % 5 + 5))
    for j in range(5, 10):
        edges.append((j, (j + 1) % 5 + 5))
    return edges


def petersen() -> Graph:
    """Petersen graph: outer 5-cycle 0..4, spokes i -> 2i mod 5 + 5, inner j -> j+1 mod 5 + 5."""
    return Graph(PETERSEN_SIZE, petersen_edges())


FILLER_APEX = (0, 2, 5, 7)


def filler11() -> tuple[Graph, int]:
    """Petersen graph plus a spare node 10 joined to nodes 0, 2, 5 and 7.

    The spare is never used for inter-block links.
    """
    g = Graph(FILLER_SIZE, petersen_edges())
    for x in FILLER_APEX:
        g.add_edge(SPARE, x)
    return g, SPARE


@dataclass(frozen=True)
class Block:
    kind: str  # "petersen" | "filler11"
    offset: int

    @property
    def size(self) -> int:
        return FILLER_SIZE if self.kind == "filler11" else PETERSEN_SIZE


@dataclass(frozen=True)
class BlockPlan:
    n: int
    blocks: tuple[Block, ...]

    @classmethod
    def for_order(cls, n: int) -> BlockPlan:
        count, r = divmod(n, 10)
        if count < 2:
            raise ValidationError(f"base graph needs n >= 20, got {n}")
        if r >= count:
            raise ValidationError(
                f"n={n} needs {r} filler blocks but has only {count} blocks to replace"
            )
        blocks = []
        offset = 0
        for k in range(count):
            kind = "filler11" if k >= count - r else "petersen"
            blocks.append(Block(kind, offset))
            offset += blocks[-1].size
        return cls(n, tuple(blocks))


def connect_blocks(g: Graph, offset_a: int, offset_b: int, matching: Sequence[int]) -> Graph:
    """Join node offset_a+i to offset_b+matching[i] for i in 0..9 (in place)."""
    if sorted(matching) != list(range(10)):
        raise ValidationError(f"matching {tuple(matching)} is not a permutation of 0..9")
    a_ids = range(offset_a, offset_a + 10)
    b_ids = range(offset_b, offset_b + 10)
    if set(a_ids) & set(b_ids):
        raise ValidationError(f"blocks at {offset_a} and {offset_b} overlap")
    pairs = [(offset_a + i, offset_b + matching[i]) for i in range(10)]
    for u, v in pairs:
        if g.has_edge(u, v):
            raise DuplicateEdgeError(f"edge {u}-{v} already present")
    for u, v in pairs:
        g.add_edge(u, v)
    return g


def create_base_graph(
    n: int,
    matching: Sequence[int] | str = "offset5",
    filler: Callable[[], tuple[Graph, int]] = filler11,
) -> Graph:
    """Chain of ``n // 10`` blocks, the last ``n % 10`` of them 11-node fillers."""
    if isinstance(matching, str):
        try:
            matching = MATCHINGS[matching]
        except KeyError:
            raise ValidationError(f"unknown matching {matching!r}") from None
    plan = BlockPlan.for_order(n)
    g = Graph(n)
    petersen_block = petersen()
    filler_block, spare = filler()
    if filler_block.n != FILLER_SIZE or spare != SPARE:
        raise ValidationError("filler graph must have 11 nodes with spare node 10")
    for block in plan.blocks:
        local = filler_block if block.kind == "filler11" else petersen_block
        for u, v in local.edges():
            g.add_edge(block.offset + u, block.offset + v)
    for left, right in zip(plan.blocks, plan.blocks[1:]):
        connect_blocks(g, left.offset, right.offset, matching)
    return g
