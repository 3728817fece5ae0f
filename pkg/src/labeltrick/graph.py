"""Immutable undirected graphs, permutations, masked BFS, enclosing subgraphs,
and a brute-force (set-)isomorphism oracle for small graphs."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

# Reserved "unreachable" distance; serialized as the literal "inf".
INF = np.iinfo(np.int64).max

ORACLE_LIMIT = 10

TargetSet = tuple[int, ...]


class GraphError(ValueError):
    pass


class ParseError(GraphError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class CapacityError(GraphError):
    """Input exceeds the brute-force oracle's size limit; use sampled checks."""


@dataclass(frozen=True, eq=False)
class Graph:
    num_nodes: int
    adjacency: tuple[tuple[int, ...], ...]
    features: np.ndarray | None = None

    def __post_init__(self):
        if len(self.adjacency) != self.num_nodes:
            raise GraphError("adjacency length != num_nodes")
        for i, nbrs in enumerate(self.adjacency):
            prev = -1
            for j in nbrs:
                if j <= prev:
                    raise GraphError(f"neighbors of {i} not strictly ascending")
                if j == i:
                    raise GraphError(f"self-loop at {i}")
                if not 0 <= j < self.num_nodes:
                    raise GraphError(f"neighbor {j} of {i} out of range")
                prev = j
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if not _contains(self.adjacency[j], i):
                    raise GraphError(f"edge ({i},{j}) is not symmetric")
        if self.features is not None:
            feats = np.array(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.num_nodes:
                raise GraphError("features must be num_nodes x feature_dim")
            feats.setflags(write=False)
            object.__setattr__(self, "features", feats)

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Iterable[tuple[int, int]],
                   features: np.ndarray | None = None) -> "Graph":
        """Build a graph, silently dropping self-loops and duplicate edges."""
        nbrs: list[set[int]] = [set() for _ in range(num_nodes)]
        for u, v in edges:
            if u == v:
                continue
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise GraphError(f"edge ({u},{v}) out of range for {num_nodes} nodes")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(num_nodes, tuple(tuple(sorted(s)) for s in nbrs), features)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @property
    def feature_dim(self) -> int:
        return 0 if self.features is None else self.features.shape[1]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        return _contains(self.adjacency[u], v)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (u, v) with u < v, in ascending order."""
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    def dense_adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=np.float64)
        for i, nbrs in enumerate(self.adjacency):
            a[i, list(nbrs)] = 1.0
        return a

    def without_edge(self, u: int, v: int) -> "Graph":
        if not self.has_edge(u, v):
            return self
        adj = list(self.adjacency)
        adj[u] = tuple(x for x in adj[u] if x != v)
        adj[v] = tuple(x for x in adj[v] if x != u)
        return Graph(self.num_nodes, tuple(adj), self.features)

    def with_features(self, features: np.ndarray | None) -> "Graph":
        return Graph(self.num_nodes, self.adjacency, features)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.num_nodes != other.num_nodes or self.adjacency != other.adjacency:
            return False
        if (self.features is None) != (other.features is None):
            return False
        return self.features is None or np.array_equal(self.features, other.features)

    def __hash__(self):
        return hash((self.num_nodes, self.adjacency))

    def __repr__(self):
        return f"Graph(num_nodes={self.num_nodes}, edges={self.edges()})"


def _contains(sorted_seq: Sequence[int], x: int) -> bool:
    lo, hi = 0, len(sorted_seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < len(sorted_seq) and sorted_seq[lo] == x


# --------------------------------------------------------------------------- ingest


@dataclass
class IdMap:
    """First-appearance remapping of raw integer ids onto 0..n-1."""

    to_local: dict[int, int] = field(default_factory=dict)
    original: list[int] = field(default_factory=list)

    def __call__(self, raw: int) -> int:
        local = self.to_local.get(raw)
        if local is None:
            local = len(self.original)
            self.to_local[raw] = local
            self.original.append(raw)
        return local

    def __len__(self):
        return len(self.original)


@dataclass
class IngestReport:
    num_nodes: int = 0
    num_edges: int = 0
    lines: int = 0
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0
    original_ids: list[int] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "num_edges": self.num_edges,
            "lines": self.lines,
            "self_loops_dropped": self.self_loops_dropped,
            "duplicates_dropped": self.duplicates_dropped,
        }


def parse_edge_pairs(text: str | Iterable[str], id_map: IdMap,
                     report: IngestReport | None = None) -> list[tuple[int, int]]:
    """Parse "u v" lines into local-id pairs (raw order kept, nothing dropped)."""
    lines = text.splitlines() if isinstance(text, str) else text
    pairs = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(line_no, f"expected 2 tokens, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(line_no, f"non-integer token in {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(line_no, "negative node id")
        pairs.append((id_map(u), id_map(v)))
        if report is not None:
            report.lines += 1
    return pairs


def parse_edge_list_with_report(text: str | Iterable[str],
                                id_map: IdMap | None = None) -> tuple[Graph, IngestReport]:
    id_map = IdMap() if id_map is None else id_map
    report = IngestReport()
    pairs = parse_edge_pairs(text, id_map, report)
    seen: set[tuple[int, int]] = set()
    for u, v in pairs:
        if u == v:
            report.self_loops_dropped += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            report.duplicates_dropped += 1
        seen.add(key)
    g = Graph.from_edges(len(id_map), seen)
    report.num_nodes = g.num_nodes
    report.num_edges = g.num_edges
    report.original_ids = list(id_map.original)
    return g, report


def parse_edge_list(text: str | Iterable[str]) -> Graph:
    return parse_edge_list_with_report(text)[0]


def read_edge_list(path, id_map: IdMap | None = None) -> tuple[Graph, IngestReport]:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list_with_report(fh.read(), id_map)


def format_edge_list(edges: Iterable[tuple[int, int]], names: Sequence[int] | None = None) -> str:
    out = io.StringIO()
    for u, v in edges:
        if names is not None:
            u, v = names[u], names[v]
        out.write(f"{u} {v}\n")
    return out.getvalue()


def read_features(path, num_nodes: int | None = None) -> np.ndarray:
    """Header-free CSV, row i = features of node i."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    feats = np.array(rows, dtype=np.float64)
    if feats.ndim != 2:
        raise GraphError("feature rows have inconsistent lengths")
    if num_nodes is not None and feats.shape[0] != num_nodes:
        raise GraphError(f"feature file has {feats.shape[0]} rows, graph has {num_nodes} nodes")
    return feats


# --------------------------------------------------------------------- permutations


def check_permutation(p: Sequence[int], n: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=np.int64)
    if n is not None and len(p) != n:
        raise GraphError(f"permutation length {len(p)} != {n}")
    if not np.array_equal(np.sort(p), np.arange(len(p))):
        raise GraphError("mapping is not a bijection")
    return p


def inverse_permutation(p: Sequence[int]) -> np.ndarray:
    p = check_permutation(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p))
    return inv


def random_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(n).astype(np.int64)


def apply_permutation(g: Graph, p: Sequence[int]) -> Graph:
    """Relabel node i as p[i]; feature row i moves to row p[i]."""
    p = check_permutation(p, g.num_nodes)
    adj: list[tuple[int, ...]] = [()] * g.num_nodes
    for i, nbrs in enumerate(g.adjacency):
        adj[p[i]] = tuple(sorted(int(p[j]) for j in nbrs))
    feats = None
    if g.features is not None:
        feats = np.empty_like(g.features)
        feats[p] = g.features
    return Graph(g.num_nodes, tuple(adj), feats)


def permute_targets(S: Sequence[int], p: Sequence[int]) -> TargetSet:
    return tuple(int(p[s]) for s in S)


def check_targets(g: Graph, S: Sequence[int]) -> TargetSet:
    S = tuple(int(s) for s in S)
    if len(set(S)) != len(S):
        raise GraphError(f"target set {S} has repeated nodes")
    for s in S:
        if not 0 <= s < g.num_nodes:
            raise GraphError(f"target {s} out of range")
    return S


# ------------------------------------------------------------------------------ BFS


def bfs_distances(g: Graph, src: int, masked: Iterable[int] = ()) -> np.ndarray:
    """Shortest-path lengths from ``src`` after deleting ``masked`` nodes.

    Unreachable and masked nodes get ``INF``.
    """
    masked = set(masked)
    if src in masked:
        raise GraphError("source node is masked")
    if not 0 <= src < g.num_nodes:
        raise GraphError(f"source {src} out of range")
    dist = [INF] * g.num_nodes
    dist[src] = 0
    adj = g.adjacency
    queue = deque([src])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] == INF and v not in masked:
                dist[v] = du
                queue.append(v)
    return np.array(dist, dtype=np.int64)


def format_distance(d: int) -> str:
    return "inf" if d == INF else str(int(d))


def parse_distance(s: str) -> int:
    return INF if s == "inf" else int(s)


# ----------------------------------------------------------------------- subgraphs


@dataclass(frozen=True, eq=False)
class Subgraph:
    """Induced enclosing subgraph in local ids.

    ``dist_to_target[k]`` holds distances (inside the subgraph) to target k;
    for two targets the other target is masked while measuring. Computed on
    first access. ``hop`` is None when the whole graph was taken.
    """

    parent_ids: tuple[int, ...]
    graph: Graph
    targets: TargetSet
    hop: int | None

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @cached_property
    def dist_to_target(self) -> tuple[np.ndarray, ...]:
        return masked_target_distances(self.graph, self.targets)


def masked_target_distances(g: Graph, S: TargetSet) -> tuple[np.ndarray, ...]:
    if len(S) == 2:
        x, y = S
        return bfs_distances(g, x, (y,)), bfs_distances(g, y, (x,))
    return tuple(bfs_distances(g, s) for s in S)


def _induce(g: Graph, nodes: Sequence[int], S: Sequence[int], hop: int | None) -> Subgraph:
    local = {v: i for i, v in enumerate(nodes)}
    adj = tuple(tuple(sorted(local[u] for u in g.adjacency[v] if u in local)) for v in nodes)
    feats = None if g.features is None else g.features[list(nodes)]
    sub = Graph(len(nodes), adj, feats)
    return Subgraph(tuple(nodes), sub, tuple(local[s] for s in S), hop)


def extract_enclosing_subgraph(g: Graph, S: Sequence[int], h: int) -> Subgraph:
    """Subgraph induced by all nodes within ``h`` hops of some target.

    Local ids: targets first in the given order, then the rest in ascending
    parent id.
    """
    if h < 0:
        raise GraphError("hop count must be >= 0")
    S = check_targets(g, S)
    within: set[int] = set(S)
    frontier = set(S)
    for _ in range(h):
        nxt = set()
        for u in frontier:
            for v in g.adjacency[u]:
                if v not in within:
                    nxt.add(v)
        within |= nxt
        frontier = nxt
        if not frontier:
            break
    rest = sorted(within.difference(S))
    return _induce(g, list(S) + rest, S, h)


def whole_graph_subgraph(g: Graph, S: Sequence[int]) -> Subgraph:
    """The entire graph viewed as an (h = infinity) enclosing subgraph, ids unchanged."""
    S = check_targets(g, S)
    return Subgraph(tuple(range(g.num_nodes)), g, S, None)


# ------------------------------------------------------------------- isomorphism


def plain_color(c):
    """Normalize numpy scalars/arrays to hashable Python values."""
    if isinstance(c, np.generic):
        return c.item()
    if isinstance(c, (np.ndarray, list, tuple)):
        return tuple(plain_color(x) for x in c)
    return c


def _check_limit(*graphs: Graph, limit: int):
    for g in graphs:
        if g.num_nodes > limit:
            raise CapacityError(
                f"{g.num_nodes}-node graph exceeds the oracle limit of {limit}; "
                "use sampled checks instead")


def are_isomorphic(g1: Graph, S1: Sequence[int], g2: Graph, S2: Sequence[int],
                   colors1: Sequence | None = None, colors2: Sequence | None = None,
                   limit: int = ORACLE_LIMIT) -> np.ndarray | None:
    """Search for pi with g1 = pi(g2), S1 = pi(S2) as sets, colors preserved.

    Returns the witness as an array mapping g2's nodes onto g1's, or None.
    Backtracking over g2's nodes, pruned by degree, color, target membership
    and adjacency consistency with the partial map.
    """
    _check_limit(g1, g2, limit=limit)
    if len(S1) != len(S2):
        raise GraphError("target sets differ in size")
    n = g1.num_nodes
    if n != g2.num_nodes or g1.num_edges != g2.num_edges:
        return None
    c1 = [None] * n if colors1 is None else [plain_color(c) for c in colors1]
    c2 = [None] * n if colors2 is None else [plain_color(c) for c in colors2]
    in1 = [False] * n
    in2 = [False] * n
    for s in S1:
        in1[s] = True
    for s in S2:
        in2[s] = True
    deg1 = [len(a) for a in g1.adjacency]
    deg2 = [len(a) for a in g2.adjacency]
    sig1 = [(in1[i], deg1[i], c1[i]) for i in range(n)]
    sig2 = [(in2[i], deg2[i], c2[i]) for i in range(n)]
    if sorted(map(repr, sig1)) != sorted(map(repr, sig2)):
        return None

    adj1 = [set(a) for a in g1.adjacency]
    adj2 = [set(a) for a in g2.adjacency]
    order = _search_order(g2, in2)
    mapping = [-1] * n
    used = [False] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        i = order[k]
        for j in range(n):
            if used[j] or sig1[j] != sig2[i]:
                continue
            ok = True
            for m in order[:k]:
                if (m in adj2[i]) != (mapping[m] in adj1[j]):
                    ok = False
                    break
            if not ok:
                continue
            mapping[i] = j
            used[j] = True
            if extend(k + 1):
                return True
            used[j] = False
            mapping[i] = -1
        return False

    if extend(0):
        return np.array(mapping, dtype=np.int64)
    return None


def _search_order(g: Graph, in_s: list[bool]) -> list[int]:
    # targets first, then grow along edges so adjacency checks prune early
    n = g.num_nodes
    seen = [False] * n
    order = []
    starts = [i for i in range(n) if in_s[i]]
    starts += sorted((i for i in range(n) if not in_s[i]), key=lambda i: -g.degree(i))
    for s in starts:
        if seen[s]:
            continue
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in sorted(g.adjacency[u], key=lambda v: (not in_s[v], -g.degree(v))):
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    # BFS may reach non-targets before later targets; keep targets in front
    return [i for i in order if in_s[i]] + [i for i in order if not in_s[i]]


def _refine_ranks(adj: tuple[tuple[int, ...], ...], colors: list[int]) -> list[int]:
    """Refine integer colors to the coarsest stable partition.

    New colors are ranks of (old color, sorted neighbour colors), so the
    result depends only on the isomorphism type and old order is preserved.
    """
    n_classes = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(len(adj))]
        rank = {s: r for r, s in enumerate(sorted(set(sigs)))}
        colors = [rank[s] for s in sigs]
        if len(rank) == n_classes:
            return colors
        n_classes = len(rank)


def canonical_code(g: Graph, colors: Sequence | None = None, S: Sequence[int] = (),
                   limit: int = ORACLE_LIMIT) -> bytes:
    """Canonical form of (g, node colors, distinguished set S).

    Equal codes exactly when a color-preserving isomorphism maps one S onto
    the other. Computed by individualization-refinement: the minimum leaf
    code over the full (unpruned) search tree.
    """
    _check_limit(g, limit=limit)
    n = g.num_nodes
    S = set(check_targets(g, S))
    labels = [repr(None)] * n if colors is None else [repr(plain_color(c)) for c in colors]
    if len(labels) != n:
        raise GraphError("colors length != num_nodes")
    keys = [(0 if v in S else 1, labels[v]) for v in range(n)]
    rank = {k: r for r, k in enumerate(sorted(set(keys)))}
    adj = g.adjacency
    adj_sets = [set(a) for a in adj]

    best: list = [None]

    def search(cols: list[int]):
        cols = _refine_ranks(adj, cols)
        if len(set(cols)) == n:
            order = sorted(range(n), key=cols.__getitem__)
            code = (
                tuple(keys[v] for v in order),
                tuple(j in adj_sets[i] for a, i in enumerate(order) for j in order[a + 1:]),
            )
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(cols):
            cells.setdefault(c, []).append(v)
        target = min((c for c in cells if len(cells[c]) > 1), key=lambda c: (len(cells[c]), c))
        for v in cells[target]:
            search([2 * c if u == v else 2 * c + 1 for u, c in enumerate(cols)])

    if n == 0:
        return repr((0, (), ())).encode()
    search([rank[k] for k in keys])
    return repr((n,) + best[0]).encode()


# ---------------------------------------------------------------- reference graph

TWIN_LINK_NAMES = ("v1", "v2", "v3", "v4", "u", "w")


def twin_link_graph() -> Graph:
    """Two triangles {v1,v2,u} and {v3,v4,w} bridged by u-w.

    Node ids follow TWIN_LINK_NAMES. v2 and v3 are automorphic, link (v1,v2)
    maps onto (v4,v3), and (v1,v2) is not equivalent to (v1,v3).
    """
    v1, v2, v3, v4, u, w = range(6)
    return Graph.from_edges(6, [(v1, v2), (v1, u), (v2, u), (v3, v4), (v4, w), (v3, w), (u, w)])


def all_graphs(n: int) -> Iterable[Graph]:
    """Every labeled simple graph on n nodes (2^(n choose 2) of them)."""
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, (pairs[b] for b in range(len(pairs)) if mask >> b & 1))


def all_pairs(n: int) -> list[TargetSet]:
    return list(combinations(range(n), 2))
