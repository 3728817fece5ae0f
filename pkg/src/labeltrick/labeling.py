"""Node labeling tricks over enclosing subgraphs and a validity checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .graph import (
    INF,
    Graph,
    GraphError,
    Subgraph,
    apply_permutation,
    are_isomorphic,
    bfs_distances,
    check_targets,
    format_distance,
    permute_targets,
    whole_graph_subgraph,
)

SCHEMES = ("zero-one", "drnl", "de", "de-plus", "all-one")
VALID_SCHEMES = ("zero-one", "drnl", "de", "de-plus")
VECTOR_SCHEMES = ("de", "de-plus")

# Uncapped DE+ code for unreachable nodes; embeds into the last table row.
UNREACHABLE = -1

_ALIASES = {"zo": "zero-one", "de+": "de-plus", "allone": "all-one", "all_one": "all-one",
            "zero_one": "zero-one", "de_plus": "de-plus"}


@dataclass(frozen=True)
class LabelingScheme:
    kind: str
    d_max: int | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in SCHEMES:
            raise ValueError(f"unknown labeling scheme {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.d_max is not None:
            if kind not in VECTOR_SCHEMES:
                raise ValueError("d_max only applies to de / de-plus")
            if self.d_max < 1:
                raise ValueError("d_max must be >= 1")
        elif kind == "de":
            object.__setattr__(self, "d_max", 3)

    @property
    def is_valid_by_design(self) -> bool:
        return self.kind != "all-one"

    @property
    def vector(self) -> bool:
        return self.kind in VECTOR_SCHEMES

    def __str__(self):
        return self.kind if self.d_max is None else f"{self.kind}(d_max={self.d_max})"


@dataclass(frozen=True, eq=False)
class NodeLabels:
    """Per-node labels: shape (n,) ints, or (n, 2) distance codes for DE/DE+.

    Vector labels keep the (to x, to y) order; ``keys`` returns them as
    unordered pairs, which is how the sum-pooled embedding consumes them.
    """

    scheme: LabelingScheme
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    @property
    def vector(self) -> bool:
        return self.values.ndim == 2

    def key_array(self) -> np.ndarray:
        return np.sort(self.values, axis=1) if self.vector else self.values

    def keys(self) -> list:
        if self.vector:
            return list(map(tuple, self.key_array().tolist()))
        return self.values.tolist()

    def max_code(self) -> int:
        return int(self.values.max()) if len(self.values) else 0

    def format(self, i: int) -> str:
        if self.vector:
            return ",".join("inf" if x == UNREACHABLE else format_distance(x)
                            for x in self.values[i])
        return str(int(self.values[i]))

    def __eq__(self, other):
        return (isinstance(other, NodeLabels) and self.scheme == other.scheme
                and np.array_equal(self.values, other.values))


def drnl_hash(d_x: int, d_y: int) -> int:
    """Closed-form double-radius label for finite distances d_x, d_y >= 1."""
    if d_x < 1 or d_y < 1 or d_x >= INF or d_y >= INF:
        raise ValueError(f"drnl_hash needs finite distances >= 1, got ({d_x}, {d_y})")
    d = d_x + d_y
    half, rem = divmod(d, 2)
    return 1 + min(d_x, d_y) + half * (half + rem - 1)


def _need_link(sg: Subgraph, scheme: LabelingScheme):
    if len(sg.targets) != 2:
        raise GraphError(f"{scheme.kind} labeling needs exactly 2 targets, got {len(sg.targets)}")


def apply_labeling(scheme: LabelingScheme, sg: Subgraph) -> NodeLabels:
    n = sg.num_nodes
    kind = scheme.kind
    if kind == "all-one":
        return NodeLabels(scheme, np.ones(n, dtype=np.int64))
    if kind == "zero-one":
        values = np.zeros(n, dtype=np.int64)
        values[list(sg.targets)] = 1
        return NodeLabels(scheme, values)

    _need_link(sg, scheme)
    x, y = sg.targets
    if kind == "drnl":
        dx, dy = sg.dist_to_target
        values = np.zeros(n, dtype=np.int64)
        for i in range(n):
            if i == x or i == y:
                values[i] = 1
            elif dx[i] != INF and dy[i] != INF:
                values[i] = drnl_hash(int(dx[i]), int(dy[i]))
        return NodeLabels(scheme, values)

    if kind == "de":
        dx = bfs_distances(sg.graph, x)
        dy = bfs_distances(sg.graph, y)
    else:
        dx, dy = sg.dist_to_target
    d = np.stack([dx, dy], axis=1)
    unreachable = d == INF
    if scheme.d_max is not None:
        d = np.minimum(d, scheme.d_max)
        d[unreachable] = scheme.d_max + 1
    else:
        d[unreachable] = UNREACHABLE
    return NodeLabels(scheme, d.astype(np.int64))


def label_graph(scheme: LabelingScheme, g: Graph, S: Sequence[int]) -> NodeLabels:
    """Label the whole graph (h = infinity) for target set S."""
    return apply_labeling(scheme, whole_graph_subgraph(g, S))


# ------------------------------------------------------------------------ validity


@dataclass
class ValidityReport:
    scheme: str
    items: int = 0
    permutations: int = 0
    disjoint_labels: bool = True
    condition1_counterexamples: list[dict] = field(default_factory=list)
    condition2_counterexamples: list[dict] = field(default_factory=list)

    @property
    def condition1_ok(self) -> bool:
        return self.disjoint_labels and not self.condition1_counterexamples

    @property
    def condition2_ok(self) -> bool:
        return not self.condition2_counterexamples

    @property
    def passed(self) -> bool:
        return self.condition1_ok and self.condition2_ok

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "items": self.items,
            "permutations": self.permutations,
            "disjoint_labels": self.disjoint_labels,
            "condition1_ok": self.condition1_ok,
            "condition2_ok": self.condition2_ok,
            "condition1_counterexamples": self.condition1_counterexamples,
            "condition2_counterexamples": self.condition2_counterexamples,
            "passed": self.passed,
        }


def _group_by_graph(corpus: Iterable[tuple[Graph, Sequence[int]]]):
    groups: dict[int, tuple[Graph, list]] = {}
    order = []
    for g, S in corpus:
        key = id(g)
        if key not in groups:
            groups[key] = (g, [])
            order.append(key)
        groups[key][1].append(check_targets(g, S))
    return [groups[k] for k in order]


def validate_labeling_scheme(scheme: LabelingScheme, corpus: Iterable[tuple[Graph, Sequence[int]]],
                             trials: int = 100, seed: int = 0,
                             max_counterexamples: int = 20) -> ValidityReport:
    """Empirically check both labeling-trick conditions on a corpus.

    Condition 2 (equivariance): for ``trials`` random permutations per graph,
    labels of (pi(g), pi(S)) must equal pi applied to labels of (g, S).
    Condition 1: target labels must never occur on non-targets anywhere in the
    corpus, and no label-preserving automorphism between two labelings of the
    same graph may send one target set anywhere but the other. Corpus entries
    sharing a Graph object are searched together.
    """
    rng = np.random.default_rng(seed)
    report = ValidityReport(str(scheme))
    target_labels: set = set()
    other_labels: set = set()

    for g, target_sets in _group_by_graph(corpus):
        n = g.num_nodes
        labels = {S: label_graph(scheme, g, S) for S in target_sets}
        report.items += len(target_sets)
        for S, lab in labels.items():
            keys = lab.keys()
            for i in range(n):
                (target_labels if i in S else other_labels).add(keys[i])

        for _ in range(trials):
            p = rng.permutation(n)
            pg = apply_permutation(g, p)
            report.permutations += 1
            for S, lab in labels.items():
                got = label_graph(scheme, pg, permute_targets(S, p)).key_array()
                mismatch = got[p] != lab.key_array()
                if mismatch.ndim == 2:
                    mismatch = mismatch.any(axis=1)
                bad = np.flatnonzero(mismatch)
                if len(bad) and len(report.condition2_counterexamples) < max_counterexamples:
                    report.condition2_counterexamples.append(
                        {"edges": g.edges(), "n": n, "targets": list(S),
                         "permutation": p.tolist(), "node": int(bad[0])})

        if len(report.condition1_counterexamples) < max_counterexamples:
            _witness_search(g, labels, report, max_counterexamples)

    report.disjoint_labels = not (target_labels & other_labels)
    return report


def _witness_search(g: Graph, labels: dict, report: ValidityReport, cap: int):
    n = g.num_nodes
    keys = {S: lab.keys() for S, lab in labels.items()}
    rkeys = {S: [repr(k) for k in ks] for S, ks in keys.items()}
    multisets = {S: sorted(rk) for S, rk in rkeys.items()}
    # candidate images T of a target set, indexed by their label multiset under S
    images: dict = {}
    for S in labels:
        index: dict = {}
        for T in combinations(range(n), len(S)):
            if set(T) != set(S):
                index.setdefault(tuple(sorted(rkeys[S][i] for i in T)), []).append(T)
        images[S] = index
    for S in labels:
        for S2 in labels:
            if multisets[S] != multisets[S2]:
                continue
            need = tuple(sorted(rkeys[S2][i] for i in S2))
            for T in images[S].get(need, ()):
                pi = are_isomorphic(g, T, g, S2, keys[S], keys[S2])
                if pi is not None:
                    report.condition1_counterexamples.append(
                        {"edges": g.edges(), "n": n, "targets": list(S), "other_targets": list(S2),
                         "witness": pi.tolist(), "image": list(T)})
                    if len(report.condition1_counterexamples) >= cap:
                        return
                    break


def exhaustive_link_corpus(max_n: int = 5, min_n: int = 2) -> list[tuple[Graph, tuple[int, int]]]:
    """All labeled graphs with min_n..max_n nodes, each with every 2-node target set."""
    from .graph import all_graphs, all_pairs

    corpus = []
    for n in range(min_n, max_n + 1):
        pairs = all_pairs(n)
        for g in all_graphs(n):
            corpus.extend((g, S) for S in pairs)
    return corpus
