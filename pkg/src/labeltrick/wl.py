"""1-WL colour refinement as an expressiveness probe and discrete GNN surrogate."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import (
    Graph,
    are_isomorphic,
    canonical_code,
    check_targets,
    extract_enclosing_subgraph,
    plain_color,
    whole_graph_subgraph,
)
from .labeling import LabelingScheme, apply_labeling


class ColorTable:
    """Shared injective re-indexing of colour signatures.

    Graphs refined through the same table get directly comparable colours.
    """

    def __init__(self):
        self._ids: dict = {}

    def __call__(self, key) -> int:
        idx = self._ids.get(key)
        if idx is None:
            idx = self._ids[key] = len(self._ids)
        return idx

    def __len__(self):
        return len(self._ids)


@dataclass
class ColorTrace:
    rounds: list[np.ndarray] = field(default_factory=list)
    converged_at: int | None = None

    @property
    def final(self) -> np.ndarray:
        return self.rounds[-1]

    def num_colors(self, t: int = -1) -> int:
        return len(set(self.rounds[t].tolist()))


def _first_appearance(keys: Sequence) -> np.ndarray:
    ids: dict = {}
    return np.array([ids.setdefault(k, len(ids)) for k in keys], dtype=np.int64)


def _step(g: Graph, colors: Sequence[int], index) -> list:
    sigs = [(colors[v], tuple(sorted(colors[u] for u in g.adjacency[v]))) for v in range(g.num_nodes)]
    if index is None:
        return _first_appearance(sigs).tolist()
    return [index(s) for s in sigs]


def _same_partition(a: Sequence[int], b: Sequence[int]) -> bool:
    return len(set(a)) == len(set(b)) == len(set(zip(a, b)))


def wl_refine(g: Graph, init_colors: Sequence | None = None, max_rounds: int | None = None,
              table: ColorTable | None = None) -> ColorTrace:
    """Run 1-WL from ``init_colors`` (uniform when None).

    Each round re-indexes (old colour, sorted neighbour colours) by first
    appearance over ascending node id, or through ``table`` when given.
    ``converged_at`` is the first round whose partition equals the previous
    one, or the round at which every node has its own colour.
    """
    n = g.num_nodes
    if init_colors is None:
        init_colors = [0] * n
    if len(init_colors) != n:
        raise ValueError("init_colors length != num_nodes")
    keys = [plain_color(c) for c in init_colors]
    if table is None:
        colors = _first_appearance(keys).tolist()
    else:
        colors = [table(("init", k)) for k in keys]
    trace = ColorTrace([np.array(colors, dtype=np.int64)])
    if len(set(colors)) == n:
        trace.converged_at = 0
        return trace
    t = 0
    while max_rounds is None or t < max_rounds:
        t += 1
        new = _step(g, colors, table)
        trace.rounds.append(np.array(new, dtype=np.int64))
        if _same_partition(colors, new) or len(set(new)) == n:
            trace.converged_at = t
            break
        colors = new
    return trace


def link_input(g: Graph, S: Sequence[int], scheme: LabelingScheme | None, h: int | None):
    """(sub)graph, local targets and initial colours fed to a link encoder."""
    S = check_targets(g, S)
    sg = whole_graph_subgraph(g, S) if h is None else extract_enclosing_subgraph(g, S, h)
    if scheme is None:
        colors = [0] * sg.num_nodes
    else:
        colors = apply_labeling(scheme, sg).keys()
    return sg.graph, sg.targets, colors


def wl_link_code(g: Graph, S: Sequence[int], scheme: LabelingScheme | None = None,
                 rounds: int = 2, h: int | None = None,
                 table: ColorTable | None = None) -> bytes:
    """Discrete link representation: WL colours of S plus the colour histogram.

    Exactly ``rounds`` refinement rounds are run (no early stop) so codes of
    different graphs stay comparable. Pass one ``table`` to every call whose
    codes will be compared.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    table = ColorTable() if table is None else table
    sub, targets, colors = link_input(g, S, scheme, h)
    cols = [table(("init", plain_color(c))) for c in colors]
    for _ in range(rounds):
        cols = _step(sub, cols, table)
    target_colors = tuple(sorted(cols[t] for t in targets))
    histogram = tuple(sorted(Counter(cols).items()))
    return repr((target_colors, histogram)).encode()


# ------------------------------------------------------- indistinguishable links


@dataclass(frozen=True)
class LinkPair:
    u: int
    v: int
    w: int

    @property
    def links(self):
        return (self.u, self.w), (self.v, self.w)


def find_indistinguishable_link_pairs(g: Graph, h: int) -> list[LinkPair]:
    """Links (u,w), (v,w) where h rounds of plain 1-WL give u and v one colour
    while w neighbours u but not v."""
    if h < 1:
        raise ValueError("h must be >= 1")
    colors = _uniform_colors(g, h)
    by_color: dict[int, list[int]] = {}
    for v, c in enumerate(colors):
        by_color.setdefault(c, []).append(v)
    pairs = []
    for members in by_color.values():
        for u in members:
            adj_u = g.adjacency[u]
            for v in members:
                if u == v:
                    continue
                adj_v = set(g.adjacency[v])
                pairs.extend(LinkPair(u, v, w) for w in adj_u if w != v and w not in adj_v)
    return pairs


def _uniform_colors(g: Graph, h: int) -> list[int]:
    cols = [0] * g.num_nodes
    for _ in range(h):
        cols = _step(g, cols, None)
    return cols


def check_link_pair(g: Graph, pair: LinkPair, h: int, table: ColorTable | None = None,
                    colors: Sequence[int] | None = None) -> tuple[bool, bool, bool]:
    """The three self-check clauses for a reported pair."""
    colors = _uniform_colors(g, h) if colors is None else colors
    same_color = colors[pair.u] == colors[pair.v]
    adjacency = g.has_edge(pair.u, pair.w) and not g.has_edge(pair.v, pair.w)
    table = ColorTable() if table is None else table
    zo = LabelingScheme("zero-one")
    differ = (wl_link_code(g, (pair.u, pair.w), zo, h, table=table)
              != wl_link_code(g, (pair.v, pair.w), zo, h, table=table))
    return same_color, adjacency, differ


# -------------------------------------------------- structural representation


def node_code(sub: Graph, colors: Sequence, i: int) -> bytes:
    """Node-most-expressive surrogate: canonical form of the coloured graph rooted at i."""
    return canonical_code(sub, colors, (i,))


def structural_link_code(g: Graph, S: Sequence[int], scheme: LabelingScheme | None,
                         h: int | None = None) -> tuple[bytes, ...]:
    """Injective set aggregation (sorted tuple) of node codes on the labeled graph."""
    sub, targets, colors = link_input(g, S, scheme, h)
    return tuple(sorted(node_code(sub, colors, t) for t in targets))


@dataclass
class StructuralReport:
    scheme: str
    hop: int | None
    items: int = 0
    classes: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"scheme": self.scheme, "hop": self.hop, "items": self.items,
                "classes": self.classes, "violations": self.violations[:20],
                "num_violations": len(self.violations), "passed": self.passed}


def verify_structural_link_repr(corpus: Sequence[tuple[Graph, Sequence[int]]],
                                scheme: LabelingScheme | None, h: int | None = None,
                                max_violations: int = 1000) -> StructuralReport:
    """Check code equality <=> set isomorphism of the (enclosing) graphs.

    Items are grouped by code. Every member must be set-isomorphic to its
    group's representative, and representatives of distinct groups must not
    be; by transitivity this covers every pair in the corpus.
    """
    report = StructuralReport("none" if scheme is None else str(scheme), h)
    groups: dict[tuple, list[int]] = {}
    views = []
    for idx, (g, S) in enumerate(corpus):
        S = check_targets(g, S)
        sg = whole_graph_subgraph(g, S) if h is None else extract_enclosing_subgraph(g, S, h)
        views.append((sg.graph, sg.targets))
        groups.setdefault(structural_link_code(g, S, scheme, h), []).append(idx)
    report.items = len(views)
    report.classes = len(groups)

    def describe(i):
        g, S = corpus[i]
        return {"index": i, "n": g.num_nodes, "edges": g.edges(), "targets": list(S)}

    reps = []
    for members in groups.values():
        rep = members[0]
        reps.append(rep)
        g0, s0 = views[rep]
        for m in members[1:]:
            g1, s1 = views[m]
            if are_isomorphic(g0, s0, g1, s1) is None:
                if len(report.violations) < max_violations:
                    report.violations.append(
                        {"kind": "equal code, not isomorphic", "a": describe(rep), "b": describe(m)})

    buckets: dict[tuple, list[int]] = {}
    for rep in reps:
        g0, s0 = views[rep]
        buckets.setdefault((g0.num_nodes, g0.num_edges, len(s0)), []).append(rep)
    for bucket in buckets.values():
        for a in range(len(bucket)):
            for b in range(a + 1, len(bucket)):
                ga, sa = views[bucket[a]]
                gb, sb = views[bucket[b]]
                if are_isomorphic(ga, sa, gb, sb) is not None:
                    if len(report.violations) < max_violations:
                        report.violations.append(
                            {"kind": "isomorphic, different code",
                             "a": describe(bucket[a]), "b": describe(bucket[b])})
    return report


# ------------------------------------------------------------------ convergence


def path_convergence(n: int) -> int:
    g = Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    return wl_refine(g).converged_at
