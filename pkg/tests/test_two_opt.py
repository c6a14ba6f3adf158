import csv
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from odgolf.errors import DisconnectedGraphError, MissingEdgeError, ValidationError
from odgolf.graph_core import Graph, GraphMetrics, apsp, graph_metrics
from odgolf.greedy import GrowConfig, generate
from odgolf.seed_builder import petersen
from odgolf.two_opt import (
    AC_BD,
    AD_BC,
    HISTORY_HEADER,
    SearchConfig,
    SwapHistory,
    SwapProposal,
    accept,
    apply_swap,
    apply_swap_incremental,
    graph_key,
    multiple_2opt,
    pair_sequence,
    parse_acceptance,
    propose,
    replay,
)

from conftest import cycle, random_connected


def _m(diameter, total, n=10):
    return GraphMetrics(n, diameter, total, n * (n - 1) // 2, True, 3, 3)


class TestPairSequence:
    def test_smallest_first(self):
        assert list(pair_sequence("smallest_first", 4)) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    def test_triangle(self):
        assert list(pair_sequence("triangle", 4)) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]

    @pytest.mark.parametrize("m", [2, 3, 7, 20])
    def test_same_pairs(self, m):
        a, b = list(pair_sequence("smallest_first", m)), list(pair_sequence("triangle", m))
        assert len(a) == len(set(a)) == m * (m - 1) // 2
        assert set(a) == set(b) == set(itertools.combinations(range(m), 2))

    def test_too_few(self):
        with pytest.raises(ValidationError):
            list(pair_sequence("triangle", 1))


class TestPropose:
    def test_c4(self):
        ps = propose(cycle(4), (0, 1), (2, 3))
        assert ps == [SwapProposal((0, 1), (2, 3), AC_BD)]
        assert ps[0].added == ((0, 2), (1, 3))

    def test_shared_endpoint(self):
        assert propose(cycle(5), (0, 1), (1, 2)) == []

    def test_both_variants(self):
        g = Graph(4, [(0, 1), (2, 3)])
        ps = propose(g, (0, 1), (2, 3))
        assert [p.variant for p in ps] == [AC_BD, AD_BC]
        assert ps[1].added == ((0, 3), (1, 2))

    def test_missing(self):
        with pytest.raises(MissingEdgeError):
            propose(cycle(4), (0, 2), (1, 3))

    def test_degree_preserved(self, rng):
        g = random_connected(rng, 12, 10)
        for e1, e2 in itertools.combinations(g.edges(), 2):
            for p in propose(g, e1, e2):
                assert (apply_swap(g, p).degrees() == g.degrees()).all()


class TestIncremental:
    def test_disconnecting_swap(self):
        g = cycle(6)
        p = SwapProposal((0, 1), (3, 4), AD_BC)  # adds 0-4 and 1-3: two triangles
        h, dm = apply_swap_incremental(g, apsp(g), p)
        assert h == Graph(6, [(1, 2), (2, 3), (1, 3), (4, 5), (5, 0), (0, 4)])
        assert dm == apsp(h)
        assert (dm.dist < 0).any()

    def test_petersen_exhaustive(self):
        g = petersen()
        dm = apsp(g)
        count = 0
        for e1, e2 in itertools.combinations(g.edges(), 2):
            for p in propose(g, e1, e2):
                h, hm = apply_swap_incremental(g, dm, p)
                assert hm == apsp(h)
                count += 1
        assert count > 0

    def test_inverse_restores(self, rng):
        g = random_connected(rng, 20, 25)
        dm = apsp(g)
        for e1, e2 in list(itertools.combinations(g.edges(), 2))[:200]:
            for p in propose(g, e1, e2):
                h, hm = apply_swap_incremental(g, dm, p)
                if (hm.dist < 0).any():
                    continue
                candidates = [q for q in propose(h, *p.added) if set(q.added) == set(p.removed)]
                assert candidates
                k, km = apply_swap_incremental(h, hm, candidates[0])
                assert k == g and km == dm

    def test_invalid(self):
        with pytest.raises(ValidationError):
            apply_swap_incremental(cycle(4), apsp(cycle(4)), SwapProposal((0, 1), (2, 3), AD_BC))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(8, 24), st.floats(0.0, 2.0), st.integers(0, 2**32 - 1))
    def test_random_oracle(self, n, density, seed):
        rng = random.Random(seed)
        g = random_connected(rng, n, int(density * n))
        dm = apsp(g)
        for e1, e2 in itertools.combinations(g.edges(), 2):
            for p in propose(g, e1, e2):
                h, hm = apply_swap_incremental(g, dm, p)
                assert hm == apsp(h)


class TestAccept:
    strict = SearchConfig()
    loose = SearchConfig(acceptance="threshold", epsilon=0.001)

    def test_diameter_drop_wins(self):
        assert accept(_m(4, 100), _m(3, 120), self.strict)

    def test_diameter_rise_loses(self):
        assert not accept(_m(3, 100), _m(4, 50), self.loose)

    def test_worse_aspl_strict(self):
        assert not accept(_m(3, 100), _m(3, 101), self.strict)

    def test_lateral(self):
        assert not accept(_m(3, 100), _m(3, 100), self.strict)
        assert accept(_m(3, 100), _m(3, 100), self.loose)

    def test_threshold_eligible(self):
        n = 1000
        pairs = n * (n - 1) // 2
        cur = GraphMetrics(n, 3, 2 * pairs, pairs, True, 3, 3)  # aspl 2
        up = GraphMetrics(n, 3, 2 * pairs + pairs // 2000, pairs, True, 3, 3)  # +0.0005
        assert accept(cur, up, self.loose)
        assert not accept(cur, up, self.strict)

    def test_disconnected_rejected(self):
        bad = GraphMetrics(10, 1, 10, 45, False, 0, 3)
        assert not accept(_m(3, 100), bad, self.loose)

    def test_parse(self):
        assert parse_acceptance("strict") == ("strict", 0.0)
        assert parse_acceptance("threshold=0.001") == ("threshold", 0.001)
        for bad in ("threshold", "threshold=x", "lenient"):
            with pytest.raises(ValidationError):
                parse_acceptance(bad)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        {"timeout": 0}, {"epsilon": -1.0}, {"rerank_cadence": 0},
        {"ordering": "random"}, {"acceptance": "greedy"}, {"restart_after": 0},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValidationError):
            SearchConfig(**kw)


@pytest.fixture(scope="module")
def g100():
    return generate(100, 6, GrowConfig(tie_break="seeded", seed=5))


class TestSearch:
    def test_petersen_unchanged(self):
        best, hist = multiple_2opt(petersen(), SearchConfig(timeout=5))
        assert best == petersen() and len(hist) == 0

    def test_minimal_timeout(self, g100):
        best, hist = multiple_2opt(g100, SearchConfig(timeout=1e-9))
        assert best == g100 and len(hist) == 0

    def test_disconnected_input(self):
        with pytest.raises(DisconnectedGraphError):
            multiple_2opt(Graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)]))

    @pytest.mark.parametrize("ordering", ["smallest_first", "triangle"])
    def test_strict_improves_and_replays(self, g100, ordering):
        cfg = SearchConfig(ordering=ordering, timeout=30, verify=True, rerank_cadence=7)
        best, hist = multiple_2opt(g100, cfg)
        assert graph_key(best) < graph_key(g100)
        assert (best.degrees() == g100.degrees()).all()
        assert replay(g100, hist) == best
        steps = [r.step for r in hist.records]
        assert steps == list(range(1, len(steps) + 1))
        m = g100.edge_count
        assert all(0 <= r.rank_i < r.rank_j < m for r in hist.records)
        prev = graph_metrics(g100).diameter
        for r in hist.records:
            assert (r.diameter_after, r.aspl_after) < (prev, r.aspl_before)
            prev = r.diameter_after
        assert not any(r.accepted_worse for r in hist.records)

    def test_strict_converges(self):
        g = generate(40, 5, GrowConfig())
        best, hist = multiple_2opt(g, SearchConfig(timeout=60))
        # converged long before the timeout; a second run from the optimum does nothing
        again, hist2 = multiple_2opt(best, SearchConfig(timeout=60))
        assert again == best and len(hist2) == 0

    def test_threshold_best_so_far(self, g100):
        cfg = SearchConfig(
            acceptance="threshold", epsilon=0.002, worse_window=200, timeout=600,
            max_evaluations=300_000, verify=True, seed=4,
        )
        best, hist = multiple_2opt(g100, cfg)
        assert any(r.accepted_worse for r in hist.records)
        assert graph_key(best) <= graph_key(g100)
        best_aspl = min([hist.records[0].aspl_before] + [r.aspl_after for r in hist.records])
        assert graph_metrics(best).aspl == pytest.approx(best_aspl, abs=1e-12)
        assert replay(g100, hist) == best

    def test_threshold_deterministic(self, g100):
        cfg = SearchConfig(acceptance="threshold", epsilon=0.002, worse_window=100,
                           timeout=600, max_evaluations=150_000, seed=9)
        a, ha = multiple_2opt(g100, cfg)
        b, hb = multiple_2opt(g100, cfg)
        assert a == b and list(ha.rows()) == list(hb.rows()) and ha.restores == hb.restores

    def test_restart_on_improve(self, g100):
        cfg = SearchConfig(acceptance="threshold", epsilon=0.002, worse_window=200, timeout=600,
                           max_evaluations=150_000, seed=4, ordering="triangle",
                           restart_on_improve=True, verify=True)
        best, hist = multiple_2opt(g100, cfg)
        assert len(hist) > 0 and graph_key(best) <= graph_key(g100)
        assert replay(g100, hist) == best
        again, hist2 = multiple_2opt(g100, cfg)
        assert again == best and list(hist2.rows()) == list(hist.rows())
        # the option changes the trajectory
        plain, _ = multiple_2opt(g100, SearchConfig(acceptance="threshold", epsilon=0.002, worse_window=200,
                                                    timeout=600, max_evaluations=150_000, seed=4,
                                                    ordering="triangle"))
        assert plain != best

    def test_history_csv(self, g100, tmp_path):
        _, hist = multiple_2opt(g100, SearchConfig(timeout=30, max_evaluations=50_000))
        path = tmp_path / "h.csv"
        hist.write_csv(path)
        rows = list(csv.reader(path.open()))
        assert tuple(rows[0]) == HISTORY_HEADER
        assert ",".join(rows[0]) == "step,aspl_before,aspl_after,diameter_after,rank_i,rank_j,variant,accepted_worse"
        assert len(rows) == len(hist) + 1
        for row in rows[1:]:
            assert row[6] in (AC_BD, AD_BC) and row[7] in ("0", "1")

    def test_rank_quantile(self):
        hist = SwapHistory()
        assert hist.rank_quantile(0.5) == 0

    def test_small_random_graphs_verified(self, rng):
        for _ in range(10):
            n = rng.randint(8, 30)
            g = random_connected(rng, n, rng.randint(n // 2, 2 * n))
            best, hist = multiple_2opt(g, SearchConfig(timeout=20, verify=True))
            assert graph_key(best) <= graph_key(g)
            assert replay(g, hist) == best
