"""Seeded synthetic graphs (thin wrappers over networkx generators)."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .graph import Graph


def from_networkx(nxg: nx.Graph) -> Graph:
    nodes = sorted(nxg.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    return Graph.from_edges(len(nodes), [(index[u], index[v]) for u, v in nxg.edges()])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return from_networkx(nx.cycle_graph(n))


def random_regular(degree: int, n: int, seed: int) -> Graph:
    return from_networkx(nx.random_regular_graph(degree, n, seed=seed))


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    return from_networkx(nx.gnp_random_graph(n, p, seed=seed))


def two_block_sbm(n: int = 400, p_in: float = 0.05, p_out: float = 0.005, seed: int = 0) -> Graph:
    """Stochastic block model with two equal communities."""
    sizes = [n // 2, n - n // 2]
    probs = [[p_in, p_out], [p_out, p_in]]
    return from_networkx(nx.stochastic_block_model(sizes, probs, seed=seed))


def random_small_graph(rng: np.random.Generator, n_range=(2, 7), p: float | None = None) -> Graph:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = float(rng.uniform(0.2, 0.8)) if p is None else p
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)
