import itertools
import math

import numpy as np
import pytest
from scipy.optimize import LinearConstraint, milp

from conftest import A, B, C, forward_sample, parse_lp_text, small_networks
from ibinfer import EMPTY, Assignment, BeliefNetwork, build_index, is_ib, probability, properly_supported, prune_for_query
from ibinfer.errors import InfeasibleError
from ibinfer.ilp import (
    InequalitySystem,
    Row,
    branch_and_bound,
    build_system,
    decode,
    exclude_and_continue,
    solve_lp,
)
from ibinfer.oracle import all_ib_assignments
from ibinfer.session import start_session

THETA_MAP = -math.log(0.9) - math.log(0.6)


def var_of(system, assignment):
    """Variable whose hypercube has exactly this full assignment."""
    for j, cid in enumerate(system.cube_ids):
        if system.index.cubes[cid].assignment == assignment:
            return j
    raise KeyError(assignment)


@pytest.fixture
def sys3(net3, net3_index):
    return build_system(net3, net3_index, {C: 1}, A)


class TestBuild:
    def test_variables_are_positive_cubes(self, sys3):
        assert sys3.n_vars == 10
        assert np.all(np.isfinite(sys3.costs)) and np.all(sys3.costs >= 0)

    def test_evidence_row(self, sys3):
        (row,) = sys3.rows_of_kind("d")
        want = {var_of(sys3, Assignment({C: 1, A: 1})), var_of(sys3, Assignment({C: 1, A: 0, B: 0})), var_of(sys3, Assignment({C: 1, A: 0, B: 1}))}
        assert set(row.coeffs) == want and row.rel == "=" and row.rhs == 1

    def test_support_row_for_edge_a_c(self, sys3):
        target = {
            var_of(sys3, Assignment({A: 1})): 1.0,
            var_of(sys3, Assignment({C: 1, A: 1})): -1.0,
            var_of(sys3, Assignment({C: 0, A: 1})): -1.0,
        }
        assert any(r.coeffs == target and r.rel == ">=" and r.rhs == 0 for r in sys3.rows_of_kind("c"))

    def test_no_consistency_rows(self, sys3):
        assert sys3.rows_of_kind("a") == []

    def test_uniqueness_only_for_free_nodes(self, sys3):
        (row,) = sys3.rows_of_kind("b")
        assert {sys3.index.cubes[sys3.cube_ids[j]].base for j in row.coeffs} == {B}

    def test_query_row(self, sys3):
        (row,) = sys3.rows_of_kind("e")
        assert {sys3.index.cubes[sys3.cube_ids[j]].base for j in row.coeffs} == {A}
        assert len(row.coeffs) == 2

    def test_every_variable_in_one_uniqueness_evidence_or_query_row(self, sys3):
        rows = sys3.rows_of_kind("b") + sys3.rows_of_kind("d") + sys3.rows_of_kind("z") + sys3.rows_of_kind("e")
        for j in range(sys3.n_vars):
            assert sum(j in r.coeffs for r in rows) == 1

    def test_consistency_rows_imploded(self):
        # P with children X and Y: one row per value of P for the pair
        half = [[0.3, 0.7], [0.6, 0.4], [0.1, 0.9]]
        net = BeliefNetwork(
            ["P", "X", "Y"],
            [["0", "1", "2"], ["0", "1"], ["0", "1"]],
            [[], [0], [0]],
            [[[0.2, 0.3, 0.5]], half, half],
        )
        system = build_system(net, build_index(net), {1: 1}, 0)
        assert len(system.rows_of_kind("a")) == 3

    def test_zero_probability_cubes_excluded(self):
        net = BeliefNetwork(["R", "K"], [["0", "1"]] * 2, [[], [0]], [[[1.0, 0.0]], [[0.5, 0.5], [0.2, 0.8]]])
        system = build_system(net, build_index(net), {}, 1)
        assert all(system.index.cubes[cid].prob > 0 for cid in system.cube_ids)
        assert system.n_vars == len(build_index(net)) - 1


class TestSolve:
    def test_forced_variable(self):
        system = InequalitySystem(np.array([0.1054]), [Row("d", {0: 1.0}, "=", 1.0)])
        sol = solve_lp(system)
        assert sol.values[0] == pytest.approx(1.0) and sol.objective == pytest.approx(0.1054)

    def test_contradiction(self):
        system = InequalitySystem(np.array([1.0]), [Row("d", {0: 1.0}, "=", 1.0), Row("x", {0: 1.0}, "=", 0.0)])
        with pytest.raises(InfeasibleError):
            solve_lp(system)
        with pytest.raises(InfeasibleError):
            branch_and_bound(system)

    def test_net3_relaxation_is_integral(self, sys3):
        sol = solve_lp(sys3)
        ones = {j for j in range(sys3.n_vars) if sol.values[j] > 0.5}
        assert ones == {var_of(sys3, Assignment({C: 1, A: 1})), var_of(sys3, Assignment({A: 1}))}
        assert np.all(np.minimum(sol.values, 1 - sol.values) < 1e-9)
        assert sol.objective == pytest.approx(THETA_MAP, abs=1e-9)

    def test_integral_root_needs_no_branching(self, sys3):
        res = branch_and_bound(sys3)
        assert res.nodes == 1 and res.lp_solves == 1
        assert res.objective == pytest.approx(0.616186, abs=1e-6)

    def test_fractional_root_branches_deterministically(self):
        # odd cycle cover: the relaxation puts 1/2 on every variable
        rows = [Row("a", {i: 1.0, j: 1.0}, ">=", 1.0) for i, j in ((0, 1), (1, 2), (0, 2))]
        system = InequalitySystem(np.ones(3), rows)
        assert solve_lp(system).values == pytest.approx([0.5, 0.5, 0.5])
        r1, r2 = branch_and_bound(system), branch_and_bound(system)
        assert r1.nodes > 1
        assert r1.objective == pytest.approx(2.0)
        assert np.array_equal(r1.values, r2.values)

    def test_exhaustive_zero_one_solutions(self, net3, net3_index, sys3):
        # every feasible 0-1 vector decodes to an IB, properly supported
        # assignment and the decoded set is exactly the oracle's
        A_, senses, b = sys3.matrix()
        best = math.inf
        decoded = set()
        for bits in itertools.product((0.0, 1.0), repeat=sys3.n_vars):
            x = np.array(bits)
            r = A_ @ x - b
            ok = np.where(senses < 0, r <= 1e-9, np.where(senses > 0, r >= -1e-9, np.abs(r) <= 1e-9))
            if not ok.all():
                continue
            a = decode(sys3, x)
            assert is_ib(net3, net3_index, a)
            assert properly_supported(net3, a, {A, C})
            decoded.add(a)
            best = min(best, float(sys3.costs @ x))
        assert best == pytest.approx(THETA_MAP, abs=1e-12)
        assert decoded == {a for a, _ in all_ib_assignments(net3, net3_index, {C: 1}, A)}


class TestDecode:
    def test_map(self, sys3, net3, net3_index):
        res = branch_and_bound(sys3)
        a = decode(sys3, res.values)
        assert a == Assignment({C: 1, A: 1})
        assert probability(net3, net3_index, a) == pytest.approx(math.exp(-res.objective), abs=1e-12)

    def test_all_zero(self, net3, net3_index):
        system = build_system(net3, net3_index, {}, None)
        assert decode(system, np.zeros(system.n_vars)) == EMPTY

    def test_selection(self, sys3):
        x = np.zeros(sys3.n_vars)
        for a in (Assignment({C: 1, A: 0, B: 0}), Assignment({A: 0}), Assignment({B: 0})):
            x[var_of(sys3, a)] = 1
        got = decode(sys3, x)
        assert got == Assignment({C: 1, A: 0, B: 0})
        assert math.exp(-sys3.costs @ x) == pytest.approx(0.04)


class TestCuts:
    def test_cut_for_map(self, sys3):
        exclude_and_continue(sys3, Assignment({C: 1, A: 1}))
        row = sys3.rows[-1]
        assert row.kind == "x" and row.rel == "<=" and row.rhs == 1
        bases = sorted((sys3.index.cubes[sys3.cube_ids[j]].base, sys3.index.cubes[sys3.cube_ids[j]].value) for j in row.coeffs)
        # every cube for C=1 and for A=1
        assert bases == [(A, 1), (C, 1), (C, 1), (C, 1)]

    def test_cut_for_singleton(self, net3, net3_index):
        system = build_system(net3, net3_index, {}, A)
        exclude_and_continue(system, Assignment({A: 1}))
        assert system.rows[-1].coeffs == {var_of(system, Assignment({A: 1})): 1.0}
        assert system.rows[-1].rhs == 0

    def test_iterated_sequence(self, net3, net3_index):
        system = build_system(net3, net3_index, {C: 1}, A)
        probs = []
        while True:
            try:
                res = branch_and_bound(system)
            except InfeasibleError:
                break
            a = decode(system, res.values)
            probs.append(math.exp(-res.objective))
            exclude_and_continue(system, a)
        assert probs == pytest.approx([0.54, 0.10, 0.04], abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_optimum_matches_external_milp(seed):
    (net,) = small_networks(1, node_count=7, max_parents=3, first_seed=200 + seed)
    rng = np.random.default_rng(seed)
    x = forward_sample(net, rng)
    q = net.topo_order[0]
    ev = {v: x[v] for v in net.topo_order[-2:] if v != q}
    pnet, pev = prune_for_query(net, ev, {q})
    pq = pnet.index_of(net.names[q])
    index = build_index(pnet)
    system = build_system(pnet, index, pev, pq)
    res = branch_and_bound(system)
    for _ in range(3):  # a few next-best rounds too
        cost, M, lo, hi = parse_lp_text(system.to_lp_text())
        ref = milp(cost, constraints=LinearConstraint(M, lo, hi), integrality=np.ones(len(cost)), bounds=(0, 1))
        try:
            res = branch_and_bound(system)
        except InfeasibleError:
            assert ref.status == 2
            break
        assert ref.status == 0
        assert res.objective == pytest.approx(ref.fun, abs=1e-7)
        # the root relaxation bounds the optimum; children never undercut parents
        assert res.trace[0][2] <= res.objective + 1e-9
        bounds = {node: bound for node, _, bound in res.trace}
        for node, parent, bound in res.trace:
            if parent in bounds:
                assert bound >= bounds[parent] - 1e-9
        exclude_and_continue(system, decode(system, res.values))


@pytest.mark.parametrize("seed", range(8))
def test_session_agrees_with_oracle(seed):
    (net,) = small_networks(1, node_count=6, max_parents=2, first_seed=300 + seed)
    q = net.topo_order[-1]
    pnet, pev = prune_for_query(net, {}, {q})
    pq = pnet.index_of(net.names[q])
    index = build_index(pnet)
    s = start_session(pnet, index, pev, pq, backend="ilp", trunc=None)
    got = list(s)
    want = all_ib_assignments(pnet, index, pev, pq)
    assert {a for a, _ in got} == {a for a, _ in want}
    for (a, p), theta in zip(got, s.thetas):
        assert abs(math.exp(-theta) - p) <= 1e-9
        assert p == pytest.approx(probability(pnet, index, a), abs=1e-12)
