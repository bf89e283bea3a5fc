import numpy as np
import pytest

from conftest import A, B, C, small_networks
from ibinfer import EMPTY, Assignment, BeliefNetwork, GenSpec, build_index, generate
from ibinfer.errors import EvidenceError, InfeasibleError, ResourceLimitError
from ibinfer.oracle import all_ib_assignments, exact_event, exact_posterior, joint_table, top_complete


def test_joint_normalised():
    for net in small_networks(5, node_count=8, max_parents=3):
        assert joint_table(net).table.sum() == pytest.approx(1.0, abs=1e-12)


def test_exact_event_examples(net3):
    assert exact_event(net3, Assignment({C: 1, A: 1})) == pytest.approx(0.54)
    assert exact_event(net3, EMPTY) == pytest.approx(1.0)


def test_exact_posterior_examples(net3):
    assert exact_posterior(net3, {C: 1}, A) == pytest.approx([0.205882, 0.794118], abs=1e-6)
    assert exact_posterior(net3, {}, C) == pytest.approx([0.32, 0.68])


def test_impossible_evidence():
    net = BeliefNetwork(["R", "K"], [["0", "1"]] * 2, [[], [0]], [[[1.0, 0.0]], [[1.0, 0.0], [0.5, 0.5]]])
    with pytest.raises(InfeasibleError):
        exact_posterior(net, {1: 1}, 0)


def test_query_in_evidence(net3):
    with pytest.raises(EvidenceError):
        exact_posterior(net3, {A: 1}, A)


def test_all_ib_net3(net3, net3_index):
    got = all_ib_assignments(net3, net3_index, {C: 1}, A)
    assert [round(p, 12) for _, p in got] == [0.54, 0.10, 0.04]
    full = all_ib_assignments(net3, net3_index, {}, C)
    assert len(full) == 6
    assert sum(p for _, p in full) == pytest.approx(1.0)


def test_all_ib_single_root():
    net = BeliefNetwork(["R"], [["a", "b", "c"]], [[]], [[[0.2, 0.3, 0.5]]])
    got = all_ib_assignments(net, build_index(net), {}, 0)
    assert sorted(a.pairs for a, _ in got) == [((0, 0),), ((0, 1),), ((0, 2),)]


def test_all_ib_without_evidence_partitions_space():
    for net in small_networks(6, node_count=6, max_parents=3):
        q = net.topo_order[-1]
        got = all_ib_assignments(net, None, {}, q)
        # pairwise disjoint events covering everything
        assert sum(p for _, p in got) == pytest.approx(1.0, abs=1e-12)


def test_all_ib_size_guard():
    net = generate(GenSpec(node_count=13, seed=1))
    with pytest.raises(ResourceLimitError):
        all_ib_assignments(net, None, {}, 0)


def test_top_complete_examples(net3):
    (best,) = top_complete(net3, 1)
    a, p = best
    assert p == pytest.approx(0.27)
    assert a == Assignment({A: 1, B: 0, C: 1})  # tie with B=1 broken lexicographically
    everything = top_complete(net3, 100)
    assert len(everything) == 8
    probs = [p for _, p in everything]
    assert probs == sorted(probs, reverse=True)
    assert top_complete(net3, 0) == []


def test_joint_table_guard():
    k = 25
    net = BeliefNetwork([f"N{i}" for i in range(k)], [["0", "1"]] * k, [[]] * k, [[[0.5, 0.5]]] * k)
    with pytest.raises(ResourceLimitError):
        joint_table(net)
