"""Ranking metrics and seeded edge splitting with negative sampling."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import CapacityError, Graph, IdMap, format_edge_list, parse_edge_pairs

Edge = tuple[int, int]


def hits_at_k(pos_scores: Sequence[float], neg_scores: Sequence[float], k: int) -> float:
    """Fraction of positives scoring strictly above the k-th highest negative."""
    if k < 1:
        raise ValueError("K must be >= 1")
    neg = np.asarray(neg_scores, dtype=np.float64)
    if len(neg) < k:
        raise ValueError(f"need at least K={k} negative scores, got {len(neg)}")
    pos = np.asarray(pos_scores, dtype=np.float64)
    if len(pos) == 0:
        return 0.0
    threshold = np.partition(neg, len(neg) - k)[len(neg) - k]
    return float(np.mean(pos > threshold))


def mrr(groups: Sequence[tuple[float, Sequence[float]]]) -> float:
    """Mean reciprocal rank; ties with a negative rank the positive below it."""
    if len(groups) == 0:
        raise ValueError("mrr needs at least one group")
    total = 0.0
    for true_score, negs in groups:
        rank = 1 + int(np.sum(np.asarray(negs, dtype=np.float64) >= true_score))
        total += 1.0 / rank
    return total / len(groups)


def parse_metric(spec: str) -> tuple[str, int]:
    """"hits:20" -> ("hits", 20); "mrr:100" -> ("mrr", 100)."""
    try:
        name, value = spec.split(":")
        value = int(value)
    except ValueError:
        raise ValueError(f"metric spec must look like hits:K or mrr:N, got {spec!r}") from None
    if name not in ("hits", "mrr") or value < 1:
        raise ValueError(f"bad metric spec {spec!r}")
    return name, value


# ---------------------------------------------------------------------- splitting


@dataclass
class EdgeSplit:
    num_nodes: int
    train: list[Edge]
    valid: list[Edge]
    test: list[Edge]
    valid_neg: list[Edge]
    test_neg: list[Edge]
    seed: int | None = None
    original_ids: list[int] | None = None

    FILES = ("train", "valid", "test", "valid_neg", "test_neg")

    def train_graph(self, features=None) -> Graph:
        return Graph.from_edges(self.num_nodes, self.train, features)

    def full_graph(self) -> Graph:
        return Graph.from_edges(self.num_nodes, self.train + self.valid + self.test)

    def save(self, directory):
        os.makedirs(directory, exist_ok=True)
        for name in self.FILES:
            with open(os.path.join(directory, f"{name}.txt"), "w", encoding="utf-8") as fh:
                fh.write(format_edge_list(getattr(self, name), self.original_ids))

    @classmethod
    def load(cls, directory) -> "EdgeSplit":
        """Read split files with one id map shared across all of them."""
        id_map = IdMap()
        parts = {}
        for name in cls.FILES:
            path = os.path.join(directory, f"{name}.txt")
            if not os.path.exists(path):
                raise FileNotFoundError(path)
            with open(path, encoding="utf-8") as fh:
                pairs = parse_edge_pairs(fh.read(), id_map)
            parts[name] = [(min(u, v), max(u, v)) for u, v in pairs if u != v]
        return cls(len(id_map), seed=None, original_ids=list(id_map.original), **parts)


def split_edges(g: Graph, ratios: Sequence[float] = (0.8, 0.1, 0.1), neg_per_pos: int = 1,
                seed: int = 0) -> EdgeSplit:
    """Shuffle edges into train/valid/test and sample valid/test negatives.

    Negatives are distinct non-edges of ``g`` drawn uniformly by rejection;
    valid and test negatives never overlap.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1) > 1e-9:
        raise ValueError("ratios must be three positive numbers summing to 1")
    rng = np.random.default_rng(seed)
    edges = g.edges()
    m = len(edges)
    order = rng.permutation(m)
    n_valid = int(round(m * ratios[1]))
    n_test = int(round(m * ratios[2]))
    shuffled = [edges[i] for i in order]
    valid = shuffled[:n_valid]
    test = shuffled[n_valid:n_valid + n_test]
    train = shuffled[n_valid + n_test:]

    n = g.num_nodes
    n_neg = neg_per_pos * (n_valid + n_test)
    available = n * (n - 1) // 2 - m
    if n_neg > available:
        raise CapacityError(f"requested {n_neg} negatives but only {available} non-edges exist")
    negs = sample_non_edges(g, n_neg, rng)
    return EdgeSplit(n, train, valid, test, negs[:neg_per_pos * n_valid],
                     negs[neg_per_pos * n_valid:], seed)


def sample_non_edges(g: Graph, count: int, rng: np.random.Generator,
                     exclude: set | None = None) -> list[Edge]:
    n = g.num_nodes
    taken = set() if exclude is None else set(exclude)
    available = n * (n - 1) // 2 - g.num_edges - len(taken)
    if count > available:
        raise CapacityError(f"requested {count} non-edges but at most {available} exist")
    out: list[Edge] = []
    if count > available // 2:
        # dense regime: enumerate instead of rejecting
        pool = [(u, v) for u in range(n) for v in range(u + 1, n)
                if not g.has_edge(u, v) and (u, v) not in taken]
        idx = rng.choice(len(pool), size=count, replace=False)
        return [pool[i] for i in idx]
    while len(out) < count:
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u == v:
            continue
        e = (min(u, v), max(u, v))
        if e in taken or g.has_edge(*e):
            continue
        taken.add(e)
        out.append(e)
    return out
