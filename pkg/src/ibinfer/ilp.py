"""IB MAP and next-best enumeration as a 0-1 linear program.

One variable per maximal hypercube with positive probability.  Row kinds:

``a``  consistency between two children sharing a parent
``b``  at most one cube per ordinary node
``c``  a cube mentioning ``v = d`` needs a cube of ``v`` with value ``d``
``d``  evidence: exactly one cube for the observed value
``z``  evidence: no cube for any other value of an evidence node
``e``  query: exactly one cube over all query values
``x``  exclusion cuts for assignments already found

Costs are ``-ln P(H)``; the objective is the negative log probability of
the induced assignment.  Branch-and-bound solves the LP relaxation with
:mod:`ibinfer.lp`, propagates clamps through the rows and branches on the
most fractional variable.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .assignments import EMPTY, Assignment
from .errors import InfeasibleError, ResourceLimitError
from .session import EnumerationSession

INT_TOL = 1e-7
_SENSE = {"<=": lp.LE, "=": lp.EQ, ">=": lp.GE}


@dataclass
class Row:
    kind: str
    coeffs: dict  # var -> coefficient
    rel: str  # "<=", "=", ">="
    rhs: float


@dataclass
class InequalitySystem:
    costs: np.ndarray
    rows: list
    cube_ids: list = field(default_factory=list)  # var -> hypercube id
    names: list = field(default_factory=list)
    net: object = None
    index: object = None
    evidence: dict = field(default_factory=dict)
    query: int | None = None

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=float)
        if not self.names:
            self.names = [f"h{j}" for j in range(self.n_vars)]
        self._dense = None

    @property
    def n_vars(self) -> int:
        return self.costs.size

    def rows_of_kind(self, kind: str) -> list:
        return [r for r in self.rows if r.kind == kind]

    def add_row(self, row: Row):
        self.rows.append(row)

    def matrix(self):
        """Dense ``(A, senses, rhs)``; rows appended since the last call are added."""
        if self._dense is None or self._dense[0].shape[0] != len(self.rows):
            done = 0 if self._dense is None else self._dense[0].shape[0]
            extra = self.rows[done:]
            block = np.zeros((len(extra), self.n_vars))
            for i, row in enumerate(extra):
                for j, a in row.coeffs.items():
                    block[i, j] = a
            senses = np.array([_SENSE[row.rel] for row in extra], dtype=int)
            rhs = np.array([row.rhs for row in extra], dtype=float)
            if done:
                A0, s0, b0 = self._dense
                block = np.vstack([A0, block])
                senses = np.concatenate([s0, senses])
                rhs = np.concatenate([b0, rhs])
            self._dense = (block, senses, rhs)
            self._split = (np.maximum(block, 0.0), np.minimum(block, 0.0))
        return self._dense

    def split_matrix(self):
        self.matrix()
        return self._split

    def to_lp_text(self) -> str:
        """One line per row: ``kind: +1 h0 -1 h3 >= 0``; objective first."""

        def term(c, name):
            return f"{'+' if c >= 0 else '-'}{abs(c):.12g} {name}"

        lines = ["min: " + " ".join(term(c, self.names[j]) for j, c in enumerate(self.costs))]
        for row in self.rows:
            body = " ".join(term(c, self.names[j]) for j, c in sorted(row.coeffs.items()))
            lines.append(f"{row.kind}: {body or '0'} {row.rel} {row.rhs:.12g}")
        return "\n".join(lines) + "\n"


@dataclass
class LpSolution:
    values: np.ndarray
    objective: float


def build_system(net, index, evidence, query: int | None) -> InequalitySystem:
    evidence = dict(evidence)
    cube_ids = [cid for cid, cube in enumerate(index.cubes) if cube.prob > 0.0]
    var_of = {cid: j for j, cid in enumerate(cube_ids)}
    costs = np.array([-math.log(index.cubes[cid].prob) for cid in cube_ids])

    def vars_for(v, d):
        return [var_of[c] for c in index.by_node_value[(v, d)] if c in var_of]

    def vars_containing(p, e, base):
        return [
            var_of[c]
            for c in index.containing.get((p, e), ())
            if c in var_of and index.cubes[c].base == base
        ]

    rows = []
    for v in net.nodes:
        for x, y in itertools.combinations(net.children[v], 2):
            for d in range(len(net.domains[v])):
                coeffs = {j: 1.0 for j in vars_containing(v, d, x)}
                for d2 in range(len(net.domains[v])):
                    if d2 != d:
                        for j in vars_containing(v, d2, y):
                            coeffs[j] = 1.0
                rows.append(Row("a", coeffs, "<=", 1.0))
    for v in net.nodes:
        if v != query and v not in evidence:
            coeffs = {j: 1.0 for d in range(len(net.domains[v])) for j in vars_for(v, d)}
            rows.append(Row("b", coeffs, "<=", 1.0))
    for v, w in net.edges():
        for d in range(len(net.domains[v])):
            coeffs = {j: 1.0 for j in vars_for(v, d)}
            for j in vars_containing(v, d, w):
                coeffs[j] = -1.0
            rows.append(Row("c", coeffs, ">=", 0.0))
    for v, d in sorted(evidence.items()):
        rows.append(Row("d", {j: 1.0 for j in vars_for(v, d)}, "=", 1.0))
        other = {j: 1.0 for d2 in range(len(net.domains[v])) if d2 != d for j in vars_for(v, d2)}
        if other:
            rows.append(Row("z", other, "=", 0.0))
    if query is not None:
        coeffs = {j: 1.0 for d in range(len(net.domains[query])) for j in vars_for(query, d)}
        rows.append(Row("e", coeffs, "=", 1.0))

    names = [f"h{cid}" for cid in cube_ids]
    return InequalitySystem(costs, rows, cube_ids, names, net, index, evidence, query)


# -- clamping and propagation ------------------------------------------------
#
# A clamp vector holds -1 for a free variable, else its fixed 0/1 value.

FREE = -1


def free_clamps(system: InequalitySystem) -> np.ndarray:
    return np.full(system.n_vars, FREE, dtype=np.int8)


def _row_state(A, pos, neg, rhs, clamps):
    free = (clamps == FREE).astype(float)
    ones = (clamps == 1).astype(float)
    r = rhs - A @ ones
    return free, r, neg @ free, pos @ free


def propagate(system: InequalitySystem, clamps: np.ndarray):
    """Extend ``clamps`` to a fixpoint of 0-1 bound propagation.

    A variable clamped to 1 in an at-most-one or exactly-one row forces its
    siblings to 0; a row left with a single variable fixes it; a row that
    can no longer be met signals infeasibility.  Returns the new clamp
    vector, or ``None`` when infeasible.
    """
    A, senses, rhs = system.matrix()
    pos, neg = system.split_matrix()
    le = senses != lp.GE
    ge = senses != lp.LE
    clamps = clamps.copy()
    while True:
        free, r, lo, hi = _row_state(A, pos, neg, rhs, clamps)
        if np.any(le & (lo > r + INT_TOL)) or np.any(ge & (hi < r - INT_TOL)):
            return None
        slack_le = np.where(le, r - lo, np.inf)[:, None] + INT_TOL
        slack_ge = np.where(ge, hi - r, np.inf)[:, None] + INT_TOL
        to0 = ((pos > slack_le) | (-neg > slack_ge)).any(axis=0)
        to1 = ((-neg > slack_le) | (pos > slack_ge)).any(axis=0)
        is_free = free > 0
        to0 &= is_free
        to1 &= is_free
        if np.any(to0 & to1):
            return None
        if not (to0.any() or to1.any()):
            return clamps
        clamps[to0] = 0
        clamps[to1] = 1


def _reduced_lp(system, clamps):
    """LP data over the free variables, dropping rows no 0-1 choice can violate."""
    A, senses, rhs = system.matrix()
    pos, neg = system.split_matrix()
    free, r, lo, hi = _row_state(A, pos, neg, rhs, clamps)
    redundant = np.where(
        senses == lp.LE,
        hi <= r + INT_TOL,
        np.where(senses == lp.GE, lo >= r - INT_TOL, (hi - lo <= 0) & (np.abs(r) <= INT_TOL)),
    )
    cols = np.flatnonzero(free > 0)
    keep = ~redundant
    const = float(system.costs[clamps == 1].sum())
    return cols, system.costs[cols], A[np.ix_(keep, cols)], senses[keep], r[keep], const


def _solve_node(system, clamps, deadline=None):
    cols, c, A, senses, b, const = _reduced_lp(system, clamps)
    res = lp.simplex(c, A, senses, b, deadline=deadline)
    if res.status != "optimal":
        return None
    values = np.where(clamps == 1, 1.0, 0.0)
    values[cols] = res.x
    return LpSolution(values, const + res.objective)


def solve_lp(system: InequalitySystem, clamps=None, deadline=None) -> LpSolution:
    """Optimum of the continuous relaxation ``0 <= h <= 1``."""
    clamps = free_clamps(system) if clamps is None else np.asarray(clamps, dtype=np.int8)
    sol = _solve_node(system, clamps, deadline)
    if sol is None:
        raise InfeasibleError("linear relaxation is infeasible")
    return sol


@dataclass
class BnbResult:
    values: np.ndarray
    objective: float
    nodes: int
    lp_solves: int
    trace: list  # (node id, parent id, LP bound)


def _integral(values):
    return bool(np.all(np.minimum(values, 1.0 - values) <= INT_TOL))


def branch_and_bound(system: InequalitySystem, deadline=None) -> BnbResult:
    """Minimum-cost 0-1 solution by depth-first branch-and-bound.

    Branches on the most fractional variable (lowest index on ties),
    exploring the clamp-to-1 child first.  A node is pruned once its LP
    bound reaches the incumbent.
    """
    root = propagate(system, free_clamps(system))
    if root is None:
        raise InfeasibleError("system is infeasible")
    # entries carry the parent's LP bound, a valid lower bound for the child
    stack = [(root, 0, -1, -math.inf)]
    best_val, best = math.inf, None
    n_nodes = lp_solves = 0
    trace = []
    while stack:
        if deadline is not None and time.monotonic() > deadline:
            raise ResourceLimitError("time limit exceeded")
        clamps, node_id, parent, bound = stack.pop()
        if bound >= best_val - 1e-12:
            continue
        sol = _solve_node(system, clamps, deadline)
        lp_solves += 1
        if sol is None:
            continue
        trace.append((node_id, parent, sol.objective))
        if sol.objective >= best_val - 1e-12:
            continue
        x = sol.values
        if _integral(x):
            best_val, best = sol.objective, np.round(x)
            continue
        frac = np.abs(x - 0.5)
        frac[np.minimum(x, 1.0 - x) <= INT_TOL] = np.inf
        j = int(np.argmin(frac))
        for val in (0, 1):  # pushed last pops first
            trial = clamps.copy()
            trial[j] = val
            child = propagate(system, trial)
            if child is not None:
                n_nodes += 1
                stack.append((child, n_nodes, node_id, sol.objective))
    if best is None:
        raise InfeasibleError("no 0-1 solution")
    return BnbResult(best, float(system.costs @ best), n_nodes + 1, lp_solves, trace)


def decode(system: InequalitySystem, values) -> Assignment:
    """Assignment induced by the selected hypercubes.

    Only cubes reachable from the evidence and query through the parents
    they mention are kept; anything else could only be a zero-cost extra.
    """
    index = system.index
    chosen = {}
    for j in np.flatnonzero(np.asarray(values) > 0.5):
        cube = index.cubes[system.cube_ids[j]]
        if cube.base in chosen:
            raise RuntimeError(f"two cubes selected for node {cube.base}")
        chosen[cube.base] = cube
    anchors = set(system.evidence)
    if system.query is not None:
        anchors.add(system.query)
    out = {}
    stack = [v for v in anchors if v in chosen]
    seen = set(stack)
    while stack:
        v = stack.pop()
        cube = chosen[v]
        for p, e in cube.assignment.items():
            if out.setdefault(p, e) != e:
                raise RuntimeError(f"selected cubes disagree on node {p}")
            if p != v and p not in seen:
                if p not in chosen:
                    raise RuntimeError(f"node {p} assigned without a cube")
                seen.add(p)
                stack.append(p)
    return Assignment._trusted(out) if out else EMPTY


def exclude_and_continue(system: InequalitySystem, found: Assignment) -> InequalitySystem:
    """Append the cut forbidding any solution agreeing with ``found`` on its span."""
    index = system.index
    var_of = {cid: j for j, cid in enumerate(system.cube_ids)}
    coeffs = {}
    for v, d in found.items():
        for cid in index.by_node_value[(v, d)]:
            if cid in var_of:
                coeffs[var_of[cid]] = 1.0
    system.add_row(Row("x", coeffs, "<=", float(len(found) - 1)))
    return system


class IlpSession(EnumerationSession):
    backend = "ilp"

    def __init__(self, net, index, evidence, query, **kwargs):
        super().__init__(net, index, evidence, query, **kwargs)
        self.system = build_system(net, index, self.evidence, query)
        self.thetas: list[float] = []
        self.bnb_stats: list[BnbResult] = []

    def _produce(self):
        try:
            res = branch_and_bound(self.system, self.deadline)
        except InfeasibleError:
            return None
        a = decode(self.system, res.values)
        self.thetas.append(res.objective)
        self.bnb_stats.append(res)
        exclude_and_continue(self.system, a)
        return a, math.exp(-res.objective)
