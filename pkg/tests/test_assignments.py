import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A, B, C, random_ib, small_networks
from ibinfer import (
    EMPTY,
    Assignment,
    build_index,
    compatible,
    format_assignment,
    is_ib,
    log_probability,
    parse_assignment,
    probability,
    properly_supported,
    subsumed_by,
    union,
)
from ibinfer.oracle import exact_event

U, V, W = 0, 1, 2

pairs = st.dictionaries(st.integers(0, 5), st.integers(0, 2), max_size=5)
assignments = pairs.map(Assignment)


class TestBasics:
    def test_compatible_examples(self):
        assert compatible(Assignment({U: 1, V: 2}), Assignment({U: 1, W: 1}))
        assert not compatible(Assignment({U: 1}), Assignment({U: 2}))
        assert compatible(EMPTY, Assignment({U: 1, V: 0}))

    def test_union_examples(self):
        a, b = Assignment({U: 1, V: 2}), Assignment({U: 1, W: 1})
        assert union(a, b) == Assignment({U: 1, V: 2, W: 1})
        assert union(a, a) == a
        with pytest.raises(ValueError):
            union(Assignment({U: 1}), Assignment({U: 2}))

    def test_subsumption_examples(self):
        assert subsumed_by(Assignment({U: 1}), Assignment({U: 1, V: 2}))
        assert not subsumed_by(Assignment({U: 1, V: 2}), Assignment({U: 1}))
        a = Assignment({U: 1, V: 2})
        assert subsumed_by(a, a)

    def test_canonical_order_and_hash(self):
        a = Assignment({W: 1, U: 0})
        b = Assignment([(U, 0), (W, 1)])
        assert a == b and hash(a) == hash(b)
        assert a.pairs == ((U, 0), (W, 1))

    def test_text_round_trip(self, net3):
        a = parse_assignment(net3, "C=1,A=1")
        assert format_assignment(net3, a) == "A=1,C=1"
        assert parse_assignment(net3, format_assignment(net3, a)) == a


class TestIb:
    def test_is_ib_examples(self, net3, net3_index):
        assert is_ib(net3, net3_index, Assignment({C: 1, A: 1}))
        assert not is_ib(net3, net3_index, Assignment({C: 1, A: 0}))
        assert is_ib(net3, net3_index, Assignment({A: 1}))

    def test_probability_examples(self, net3, net3_index):
        assert probability(net3, net3_index, Assignment({C: 1, A: 1})) == pytest.approx(0.54, abs=1e-12)
        assert probability(net3, net3_index, Assignment({A: 1})) == pytest.approx(0.6, abs=1e-12)
        assert probability(net3, net3_index, Assignment({C: 1, A: 0, B: 1})) == pytest.approx(0.10, abs=1e-12)
        assert probability(net3, net3_index, EMPTY) == 1.0

    def test_probability_of_non_ib_rejected(self, net3, net3_index):
        with pytest.raises(ValueError):
            log_probability(net3, net3_index, Assignment({C: 1, A: 0}))

    def test_properly_supported_examples(self, net3):
        assert properly_supported(net3, Assignment({C: 1, A: 1}), {C})
        assert not properly_supported(net3, Assignment({A: 1, B: 0}), {C})
        assert properly_supported(net3, Assignment({C: 1}), {C})

    @pytest.mark.parametrize("seed", range(10))
    def test_product_formula_matches_joint_sum(self, seed):
        (net,) = small_networks(1, node_count=7, max_parents=3, first_seed=seed)
        index = build_index(net)
        rng = np.random.default_rng(seed)
        for _ in range(30):
            a = random_ib(net, index, rng)
            assert is_ib(net, index, a)
            assert probability(net, index, a) == pytest.approx(exact_event(net, a), abs=1e-12)


class TestAlgebra:
    @given(assignments, assignments)
    def test_compatible_symmetric(self, a, b):
        assert compatible(a, b) == compatible(b, a)

    @given(assignments, assignments, assignments)
    def test_union_commutative_associative(self, a, b, c):
        if compatible(a, b) and compatible(union(a, b), c):
            assert union(a, b) == union(b, a)
            assert union(union(a, b), c) == union(a, union(b, c))

    @given(assignments, assignments)
    def test_union_subsumes_inputs(self, a, b):
        if compatible(a, b):
            u = union(a, b)
            assert subsumed_by(a, u) and subsumed_by(b, u)

    @given(assignments, assignments, assignments)
    def test_subsumption_transitive(self, a, b, c):
        if subsumed_by(a, b) and subsumed_by(b, c):
            assert subsumed_by(a, c)

    @given(assignments, assignments)
    def test_subsumption_implies_compatible(self, a, b):
        if subsumed_by(a, b):
            assert compatible(a, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40), st.integers(0, 2**32 - 1))
def test_union_of_compatible_ib_is_ib(net_seed, rng_seed):
    (net,) = small_networks(1, node_count=7, max_parents=3, first_seed=net_seed)
    index = build_index(net)
    rng = np.random.default_rng(rng_seed)
    a, b = random_ib(net, index, rng), random_ib(net, index, rng)
    if compatible(a, b):
        assert is_ib(net, index, union(a, b))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40), st.integers(0, 2**32 - 1))
def test_probability_monotone_under_subsumption(net_seed, rng_seed):
    (net,) = small_networks(1, node_count=7, max_parents=3, first_seed=net_seed)
    index = build_index(net)
    rng = np.random.default_rng(rng_seed)
    a, b = random_ib(net, index, rng), random_ib(net, index, rng)
    if compatible(a, b):
        u = union(a, b)
        pu = probability(net, index, u)
        assert pu <= probability(net, index, a) + 1e-15
        assert pu <= probability(net, index, b) + 1e-15
        assert not math.isnan(pu)
