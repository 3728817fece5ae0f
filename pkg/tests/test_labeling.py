import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs, graphs_with_link
from labeltrick.generators import random_small_graph
from labeltrick.graph import Graph, GraphError, extract_enclosing_subgraph, twin_link_graph
from labeltrick.labeling import (
    UNREACHABLE,
    LabelingScheme,
    apply_labeling,
    drnl_hash,
    label_graph,
    validate_labeling_scheme,
)


def drnl_enumeration(max_d: int) -> dict:
    """Label radius pairs in order of (d, min) with consecutive labels from 2."""
    table = {}
    label = 2
    for d in range(2, max_d + 1):
        for lo in range(1, d // 2 + 1):
            table[(lo, d - lo)] = label
            label += 1
    return table


def test_drnl_spot_values():
    assert drnl_hash(1, 1) == 2
    assert drnl_hash(1, 2) == 3
    assert drnl_hash(2, 2) == 5
    assert drnl_hash(1, 4) == 6
    assert drnl_hash(2, 3) == drnl_hash(3, 2) == 7


def test_drnl_matches_enumeration_oracle():
    for (a, b), label in drnl_enumeration(100).items():
        assert drnl_hash(a, b) == label
        assert drnl_hash(b, a) == label


def test_drnl_injective_on_unordered_pairs():
    seen = {}
    for a in range(1, 51):
        for b in range(a, 51):
            code = drnl_hash(a, b)
            assert code not in seen, (a, b, seen.get(code))
            seen[code] = (a, b)


@pytest.mark.parametrize("bad", [(0, 1), (1, 0), (np.iinfo(np.int64).max, 2)])
def test_drnl_rejects_targets_and_inf(bad):
    with pytest.raises(ValueError):
        drnl_hash(*bad)


# ----------------------------------------------------------------- labeling rules


def path_xay():
    # x=0, a=1, y=2
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    return extract_enclosing_subgraph(g, (0, 2), 1)


def by_parent(sg, labels):
    return {sg.parent_ids[i]: k for i, k in enumerate(labels.keys())}


def test_path_drnl():
    sg = path_xay()
    assert by_parent(sg, apply_labeling(LabelingScheme("drnl"), sg)) == {0: 1, 2: 1, 1: 2}


def test_path_zero_one():
    sg = path_xay()
    assert by_parent(sg, apply_labeling(LabelingScheme("zero-one"), sg)) == {0: 1, 2: 1, 1: 0}


def test_path_de_uses_unmasked_distances():
    sg = path_xay()
    lab = apply_labeling(LabelingScheme("de"), sg)
    got = {sg.parent_ids[i]: tuple(lab.values[i]) for i in range(3)}
    # d(x, y) = 2 through a
    assert got == {0: (0, 2), 2: (2, 0), 1: (1, 1)}


def test_path_de_plus_masks():
    sg = path_xay()
    lab = apply_labeling(LabelingScheme("de-plus"), sg)
    got = {sg.parent_ids[i]: tuple(lab.values[i]) for i in range(3)}
    assert got == {0: (0, UNREACHABLE), 2: (UNREACHABLE, 0), 1: (1, 1)}
    assert lab.format(0) == "0,inf"


def test_de_cap_and_unreachable_code():
    g = Graph.from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    lab = label_graph(LabelingScheme("de", 2), g, (0, 1))
    assert lab.values[5].tolist() == [2, 2]
    assert lab.values[6].tolist() == [3, 3]
    assert LabelingScheme("de").d_max == 3


def test_drnl_unreachable_is_zero():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    lab = label_graph(LabelingScheme("drnl"), g, (0, 1))
    assert lab.values.tolist() == [1, 1, 0, 0]


def test_all_one_and_aliases():
    sg = path_xay()
    assert apply_labeling(LabelingScheme("all-one"), sg).values.tolist() == [1, 1, 1]
    assert LabelingScheme("zo").kind == "zero-one"
    assert LabelingScheme("de+").kind == "de-plus"
    assert not LabelingScheme("all-one").is_valid_by_design


def test_scheme_errors():
    with pytest.raises(ValueError):
        LabelingScheme("nope")
    with pytest.raises(ValueError):
        LabelingScheme("drnl", 3)
    with pytest.raises(ValueError):
        LabelingScheme("de", 0)


def test_arity_errors():
    g = twin_link_graph()
    with pytest.raises(GraphError):
        label_graph(LabelingScheme("drnl"), g, (0,))
    assert label_graph(LabelingScheme("zero-one"), g, (0,)).values.sum() == 1


@given(graphs_with_link(), st.sampled_from(["drnl", "zero-one", "de", "de-plus"]))
def test_target_labels_disjoint_from_others(gl, kind):
    g, S = gl
    keys = label_graph(LabelingScheme(kind), g, S).keys()
    targets = {keys[i] for i in S}
    others = {keys[i] for i in range(g.num_nodes) if i not in S}
    assert not targets & others


def _partition(keys):
    ids = {}
    return [ids.setdefault(k, len(ids)) for k in keys]


def test_de_plus_partition_equals_drnl():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        g = random_small_graph(rng, (3, 10))
        x, y = (int(v) for v in rng.choice(g.num_nodes, 2, replace=False))
        sg = extract_enclosing_subgraph(g, (x, y), int(rng.integers(1, 4)))
        drnl = apply_labeling(LabelingScheme("drnl"), sg).keys()
        plus = apply_labeling(LabelingScheme("de-plus"), sg).values
        keys = []
        for i, (a, b) in enumerate(plus.tolist()):
            if i in sg.targets:
                keys.append("target")
            elif UNREACHABLE in (a, b):
                keys.append("null")
            else:
                keys.append(tuple(sorted((a, b))))
        assert _partition(keys) == _partition(drnl)


# --------------------------------------------------------------------- validity


@pytest.mark.parametrize("kind", ["zero-one", "drnl", "de", "de-plus"])
def test_equivariance_on_random_graphs_up_to_7(kind):
    rng = np.random.default_rng(11)
    corpus = []
    for _ in range(25):
        g = random_small_graph(rng, (2, 7))
        corpus.append((g, tuple(int(v) for v in rng.choice(g.num_nodes, 2, replace=False))))
    rep = validate_labeling_scheme(LabelingScheme(kind), corpus, trials=100, seed=1)
    assert rep.condition2_ok
    assert rep.passed


def test_all_one_fails_condition_one():
    # path 0-1-2: {0,1} and {1,2} are swapped by the reflection, {0,2} is not one of them
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    rep = validate_labeling_scheme(LabelingScheme("all-one"), [(g, (0, 1)), (g, (1, 2))], trials=5)
    assert rep.condition2_ok
    assert not rep.condition1_ok
    assert rep.condition1_counterexamples


def test_condition_two_detects_non_equivariant_labels(monkeypatch):
    import labeltrick.labeling as lab

    real = lab.apply_labeling

    def by_id(scheme, sg):
        out = real(scheme, sg)
        vals = out.values.copy()
        vals[0] += 7  # depends on the node id, not the structure
        return lab.NodeLabels(scheme, vals)

    monkeypatch.setattr(lab, "apply_labeling", by_id)
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    rep = validate_labeling_scheme(LabelingScheme("zero-one"), [(g, (1, 2))], trials=20)
    assert not rep.condition2_ok


@given(graphs(2, 6), st.data())
def test_labels_follow_permutation(g, data):
    S = (0, 1)
    p = np.array(data.draw(st.permutations(range(g.num_nodes))))
    from labeltrick.graph import apply_permutation, permute_targets

    for kind in ("drnl", "de", "de-plus", "zero-one"):
        a = label_graph(LabelingScheme(kind), g, S).key_array()
        b = label_graph(LabelingScheme(kind), apply_permutation(g, p), permute_targets(S, p)).key_array()
        assert np.array_equal(b[p], a)
