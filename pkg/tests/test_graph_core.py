import io
import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odgolf.errors import (
    DuplicateEdgeError,
    MissingEdgeError,
    NodeRangeError,
    ParseError,
    SelfLoopError,
    ValidationError,
)
from odgolf.graph_core import (
    UNREACHABLE,
    DistanceMatrix,
    Graph,
    apsp,
    bfs_distances,
    count_cycles_through_edge,
    lower_bounds,
    metrics,
    parse_edge_list,
    serialize_edge_list,
)
from odgolf.seed_builder import petersen

from conftest import bfs_oracle, complete, cycle, path, random_graph


class TestEdgeList:
    def test_parse_simple(self):
        g = parse_edge_list("0 1\n1 2\n")
        assert g.n == 3
        assert g.edges() == [(0, 1), (1, 2)]

    def test_duplicates_collapse(self):
        g = parse_edge_list("0 1\n1 0\n")
        assert g.n == 2 and g.edge_count == 1

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopError):
            parse_edge_list("0 0\n")

    def test_malformed_token_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse_edge_list("0 1\n1 x\n")
        assert err.value.line == 2

    def test_wrong_field_count(self):
        with pytest.raises(ParseError):
            parse_edge_list("0 1 2\n")

    def test_blank_lines_and_stream(self):
        g = parse_edge_list(io.StringIO("\n0 1\n\n  2 1  \n"))
        assert g.edges() == [(0, 1), (1, 2)]

    def test_order_override(self):
        g = parse_edge_list("0 1\n", n=5)
        assert g.n == 5 and g.degree(4) == 0
        with pytest.raises(NodeRangeError):
            parse_edge_list("0 7\n", n=5)

    def test_serialize_ordering(self):
        g = Graph(3, [(1, 2), (0, 1)])
        assert serialize_edge_list(g) == "0 1\n1 2\n"

    def test_serialize_empty(self):
        assert serialize_edge_list(Graph(2)) == ""

    def test_round_trip_petersen(self):
        g = petersen()
        assert parse_edge_list(serialize_edge_list(g)) == g

    @given(st.integers(2, 12), st.integers(0, 2**32 - 1))
    def test_round_trip_random(self, n, seed):
        g = random_graph(random.Random(seed), n, 0.4)
        assert parse_edge_list(serialize_edge_list(g), n=n) == g


class TestMutation:
    def test_add_closes_triangle(self):
        g = path(3)
        g.add_edge(0, 2)
        assert g == complete(3)

    def test_errors_are_distinct(self):
        g = path(3)
        with pytest.raises(DuplicateEdgeError):
            g.add_edge(0, 1)
        with pytest.raises(SelfLoopError):
            g.add_edge(1, 1)
        with pytest.raises(NodeRangeError):
            g.add_edge(0, 3)
        with pytest.raises(MissingEdgeError):
            g.remove_edge(0, 2)

    def test_remove_then_add(self):
        g = petersen()
        h = g.copy()
        h.remove_edge(0, 1)
        assert h.edge_count == 14 and not h.has_edge(1, 0)
        h.add_edge(1, 0)
        assert h == g

    def test_adjacency_sorted_and_symmetric(self):
        g = Graph(5, [(4, 0), (2, 0), (3, 0), (1, 0)])
        assert g.neighbors(0) == (1, 2, 3, 4)
        assert all(0 in g.neighbors(v) for v in range(1, 5))


class TestDistances:
    def test_cycle4(self):
        assert bfs_distances(cycle(4), 0).tolist() == [0, 1, 2, 1]

    def test_petersen_shells(self):
        g = petersen()
        for s in range(10):
            row = bfs_distances(g, s).tolist()
            assert sorted(row) == [0] + [1] * 3 + [2] * 6

    def test_disconnected(self):
        assert bfs_distances(Graph(2), 0).tolist() == [0, UNREACHABLE]

    def test_bad_source(self):
        with pytest.raises(NodeRangeError):
            bfs_distances(cycle(4), 4)

    def test_k4(self):
        d = apsp(complete(4)).dist
        assert (d + np.eye(4, dtype=d.dtype) == 1).all()

    def test_p4(self):
        assert apsp(path(4))[0, 3] == 3

    def test_petersen_pairs(self):
        d = apsp(petersen()).dist
        off = d[~np.eye(10, dtype=bool)]
        assert set(off.tolist()) == {1, 2}

    def test_oracle_equivalence_exhaustive_n5(self):
        pairs = list(itertools.combinations(range(5), 2))
        for mask in range(1 << len(pairs)):
            g = Graph(5, [p for k, p in enumerate(pairs) if mask >> k & 1])
            d = apsp(g).dist
            for s in range(5):
                want = [UNREACHABLE if x is None else x for x in bfs_oracle(g, s)]
                assert d[s].tolist() == want

    @settings(max_examples=60)
    @given(st.integers(2, 8), st.floats(0.1, 0.9), st.integers(0, 2**32 - 1))
    def test_matrix_invariants(self, n, p, seed):
        g = random_graph(random.Random(seed), n, p)
        d = apsp(g).dist
        assert (np.diag(d) == 0).all()
        assert (d == d.T).all()
        for u, v in itertools.product(range(n), repeat=2):
            assert (d[u, v] == 1) == g.has_edge(u, v) if u != v else True
            if d[u, v] >= 0:
                for w in range(n):
                    if d[u, w] >= 0 and d[w, v] >= 0:
                        assert d[u, v] <= d[u, w] + d[w, v]
        for s in range(n):
            want = [UNREACHABLE if x is None else x for x in bfs_oracle(g, s)]
            assert d[s].tolist() == want


class TestMetrics:
    def test_k4(self):
        m = metrics(apsp(complete(4)))
        assert m.diameter == 1 and m.aspl == 1.0 and m.connected

    def test_p3(self):
        m = metrics(apsp(path(3)))
        assert m.diameter == 2 and m.aspl_exact == Fraction(4, 3)

    def test_petersen(self):
        m = metrics(apsp(petersen()))
        assert m.diameter == 2 and m.aspl_exact == Fraction(5, 3)
        assert (m.degree_min, m.degree_max) == (3, 3)

    def test_disconnected_flag(self):
        m = metrics(apsp(Graph(4, [(0, 1), (2, 3)])))
        assert not m.connected
        assert m.diameter == 1

    def test_too_small(self):
        with pytest.raises(ValidationError):
            metrics(DistanceMatrix(np.zeros((1, 1), dtype=np.int32)))

    @settings(max_examples=40)
    @given(st.integers(2, 10), st.integers(0, 2**32 - 1))
    def test_aspl_range_and_bound(self, n, seed):
        g = random_graph(random.Random(seed), n, 0.5)
        m = metrics(apsp(g))
        if not m.connected:
            return
        assert 1 <= m.aspl <= m.diameter
        if m.degree_max >= 2:
            assert m.aspl_exact >= lower_bounds(n, m.degree_max)[1]


class TestLowerBounds:
    def test_complete(self):
        assert lower_bounds(5, 4) == (1, Fraction(1))

    def test_petersen(self):
        assert lower_bounds(10, 3) == (2, Fraction(5, 3))

    def test_256_16(self):
        # 16 nodes at distance 1, the other 239 at distance 2
        assert lower_bounds(256, 16) == (2, Fraction(16 + 2 * 239, 255))
        assert lower_bounds(256, 16)[1] == Fraction(494, 255)

    def test_explicit_counting(self):
        for n, d in [(30, 3), (100, 4), (4096, 60), (10000, 64)]:
            shells, left, k = [], n - 1, 0
            while left:
                k += 1
                take = min(left, d * (d - 1) ** (k - 1))
                shells.append(take)
                left -= take
            want = Fraction(sum((i + 1) * c for i, c in enumerate(shells)), n - 1)
            assert lower_bounds(n, d) == (len(shells), want)

    @pytest.mark.parametrize("n", [10, 50, 256, 1000])
    def test_monotone_in_degree(self, n):
        values = [lower_bounds(n, d)[1] for d in range(2, 40)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_rejects_small(self):
        with pytest.raises(ValidationError):
            lower_bounds(1, 3)


class TestCycles:
    def test_c5(self):
        g = cycle(5)
        assert all(count_cycles_through_edge(g, u, v, 5) == 1 for u, v in g.edges())

    def test_k3(self):
        assert count_cycles_through_edge(complete(3), 0, 1, 3) == 1

    def test_k4_counts(self):
        g = complete(4)
        # through a fixed edge: two triangles, two 4-cycles
        assert count_cycles_through_edge(g, 0, 1, 3) == 2
        assert count_cycles_through_edge(g, 0, 1, 4) == 2

    def test_petersen_girth_and_pentagons(self):
        g = petersen()
        for u, v in g.edges():
            assert count_cycles_through_edge(g, u, v, 3) == 0
            assert count_cycles_through_edge(g, u, v, 4) == 0
            assert count_cycles_through_edge(g, u, v, 5) == 4
        # 12 pentagons x 5 edges / 15 edges
        total = sum(count_cycles_through_edge(g, u, v, 5) for u, v in g.edges())
        assert total == 12 * 5

    def test_missing_edge(self):
        with pytest.raises(MissingEdgeError):
            count_cycles_through_edge(cycle(5), 0, 2, 5)
