"""Neighbourhood heuristics (common neighbours, Adamic-Adar)."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, GraphError


def _check_pair(g: Graph, u: int, v: int):
    if u == v:
        raise GraphError("heuristics need two distinct nodes")
    for x in (u, v):
        if not 0 <= x < g.num_nodes:
            raise GraphError(f"node {x} out of range")


def _intersect(a: Sequence[int], b: Sequence[int]) -> list[int]:
    # two-pointer merge over sorted neighbour lists
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            i += 1
        elif a[i] > b[j]:
            j += 1
        else:
            out.append(a[i])
            i += 1
            j += 1
    return out


def common_neighbors(g: Graph, u: int, v: int) -> int:
    _check_pair(g, u, v)
    return len(_intersect(g.adjacency[u], g.adjacency[v]))


def adamic_adar(g: Graph, u: int, v: int) -> float:
    _check_pair(g, u, v)
    return sum(1.0 / math.log(len(g.adjacency[z]))
               for z in _intersect(g.adjacency[u], g.adjacency[v]))


HEURISTICS = {"cn": common_neighbors, "aa": adamic_adar}


def score_pairs(g: Graph, pairs: Iterable[tuple[int, int]], method: str) -> np.ndarray:
    fn = HEURISTICS[method]
    return np.array([fn(g, u, v) for u, v in pairs], dtype=np.float64)
