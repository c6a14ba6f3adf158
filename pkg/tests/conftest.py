import itertools
import random
import sys
from collections import deque

import pytest

from odgolf.graph_core import Graph


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return Graph(n, itertools.combinations(range(n), 2))


def bfs_oracle(g, s):
    """Plain-Python BFS, independent of the compiled kernels."""
    dist = [None] * g.n
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for w in g.neighbors(u):
            if dist[w] is None:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def random_connected(rng, n, extra):
    """Random spanning tree plus `extra` random chords."""
    order = list(range(n))
    rng.shuffle(order)
    g = Graph(n)
    for k in range(1, n):
        g.add_edge(order[k], order[rng.randrange(k)])
    tries = 0
    while extra > 0 and tries < 50 * n:
        tries += 1
        u, v = rng.sample(range(n), 2)
        if not g.has_edge(u, v):
            g.add_edge(u, v)
            extra -= 1
    return g


def random_graph(rng, n, p):
    return Graph(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])


@pytest.fixture
def rng():
    return random.Random(20151120)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
