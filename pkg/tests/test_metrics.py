import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from labeltrick.generators import erdos_renyi
from labeltrick.graph import CapacityError, Graph
from labeltrick.metrics import EdgeSplit, hits_at_k, mrr, parse_metric, sample_non_edges, split_edges

scores = st.lists(st.integers(-100, 100).map(float), min_size=1, max_size=30)


def hits_oracle(pos, neg, k):
    ranked = sorted(neg, reverse=True)
    return sum(p > ranked[k - 1] for p in pos) / len(pos)


def mrr_oracle(groups):
    total = 0.0
    for true, negs in groups:
        ranked = sorted([(s, 1) for s in negs] + [(true, 0)], key=lambda t: (-t[0], -t[1]))
        total += 1.0 / (ranked.index((true, 0)) + 1)
    return total / len(groups)


def test_hits_examples():
    assert hits_at_k([10], [1, 2, 3], 1) == 1.0
    assert hits_at_k([3.0], [1, 2, 4, 5], 2) == 0.0
    assert hits_at_k([3.0], [1, 2, 4, 5], 3) == 1.0


def test_hits_needs_enough_negatives():
    with pytest.raises(ValueError):
        hits_at_k([1], [0, 0], 3)
    with pytest.raises(ValueError):
        hits_at_k([1], [0], 0)


def test_mrr_examples():
    assert mrr([(5.0, [1, 2])]) == 1.0
    groups = [(5.0, [1.0]), (5.0, [6.0, 1.0]), (5.0, [6.0, 7.0, 8.0, 0.0])]
    assert mrr(groups) == pytest.approx(0.58333, abs=1e-5)
    assert mrr([(1.0, [1.0, 0.0])]) == 0.5
    with pytest.raises(ValueError):
        mrr([])


def test_parse_metric():
    assert parse_metric("hits:20") == ("hits", 20)
    assert parse_metric("mrr:100") == ("mrr", 100)
    for bad in ("hits", "auc:3", "hits:0", "hits:x"):
        with pytest.raises(ValueError):
            parse_metric(bad)


@given(scores, scores, st.integers(1, 30))
def test_hits_monotone_and_matches_oracle(pos, neg, k):
    if k > len(neg):
        return
    assert hits_at_k(pos, neg, k) == pytest.approx(hits_oracle(pos, neg, k))
    if k + 1 <= len(neg):
        assert hits_at_k(pos, neg, k) <= hits_at_k(pos, neg, k + 1)


@given(scores, scores, st.sampled_from([0.125, 0.5, 2.0, 3.0, 10.0]))
def test_metrics_scale_invariant(pos, neg, c):
    k = len(neg)
    assert hits_at_k(pos, neg, k) == hits_at_k([c * p for p in pos], [c * s for s in neg], k)
    groups = [(p, neg) for p in pos]
    assert mrr(groups) == mrr([(c * p, [c * s for s in neg]) for p in pos])


def test_metrics_agree_with_sort_oracle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        pos = rng.integers(0, 10, size=rng.integers(1, 8)).astype(float)
        neg = rng.integers(0, 10, size=rng.integers(1, 12)).astype(float)
        k = int(rng.integers(1, len(neg) + 1))
        assert hits_at_k(pos, neg, k) == pytest.approx(hits_oracle(pos, neg, k))
        groups = [(p, neg) for p in pos]
        assert mrr(groups) == pytest.approx(mrr_oracle(groups))


# ----------------------------------------------------------------------- splits


def hundred_edge_graph():
    rng = np.random.default_rng(1)
    pairs = [(u, v) for u in range(40) for v in range(u + 1, 40)]
    idx = rng.choice(len(pairs), 100, replace=False)
    return Graph.from_edges(40, [pairs[i] for i in idx])


def test_split_sizes_and_invariants():
    g = hundred_edge_graph()
    sp = split_edges(g, (0.8, 0.1, 0.1), neg_per_pos=3, seed=4)
    assert (len(sp.train), len(sp.valid), len(sp.test)) == (80, 10, 10)
    assert len(sp.valid_neg) == 30 and len(sp.test_neg) == 30
    parts = [set(sp.train), set(sp.valid), set(sp.test)]
    assert sum(map(len, parts)) == len(set().union(*parts)) == 100
    negs = sp.valid_neg + sp.test_neg
    assert len(set(negs)) == len(negs)
    for u, v in negs:
        assert u != v and not g.has_edge(u, v)


def test_split_deterministic():
    g = hundred_edge_graph()
    assert split_edges(g, seed=9) == split_edges(g, seed=9)
    assert split_edges(g, seed=9).test != split_edges(g, seed=10).test


def test_split_errors():
    g = hundred_edge_graph()
    with pytest.raises(ValueError):
        split_edges(g, (0.8, 0.1, 0.2))
    k4 = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    with pytest.raises(CapacityError):
        split_edges(k4, (0.4, 0.3, 0.3), neg_per_pos=2)


def test_dense_graph_negatives_enumerated():
    g = erdos_renyi(20, 0.8, 0)
    available = 190 - g.num_edges
    negs = sample_non_edges(g, available, np.random.default_rng(0))
    assert len(set(negs)) == available
    for u, v in negs:
        assert u < v and not g.has_edge(u, v)
    with pytest.raises(CapacityError):
        sample_non_edges(g, available + 1, np.random.default_rng(0))


def test_split_save_load(tmp_path):
    g = hundred_edge_graph()
    sp = split_edges(g, seed=2)
    sp.save(tmp_path)
    back = EdgeSplit.load(tmp_path)
    names = back.original_ids
    remap = [{(names[u], names[v]) for u, v in getattr(back, f)} for f in EdgeSplit.FILES]
    orig = [{tuple(e) for e in getattr(sp, f)} for f in EdgeSplit.FILES]
    for a, b in zip(remap, orig):
        assert {tuple(sorted(e)) for e in a} == b
