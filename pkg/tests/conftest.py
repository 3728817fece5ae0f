import os
import sys

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from labeltrick.graph import Graph

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def graphs(draw, min_nodes=1, max_nodes=7):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [p for p, keep in zip(pairs, mask) if keep])


@st.composite
def graphs_with_link(draw, min_nodes=2, max_nodes=7):
    g = draw(graphs(min_nodes, max_nodes))
    x = draw(st.integers(0, g.num_nodes - 1))
    y = draw(st.integers(0, g.num_nodes - 1).filter(lambda v: v != x))
    return g, (x, y)


@st.composite
def permutations(draw, n):
    return np.array(draw(st.permutations(range(n))), dtype=np.int64)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
