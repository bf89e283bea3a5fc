"""Brute-force ground truth for small networks.

Nothing here uses the hypercube index or the product formula: event
probabilities are sums over the full joint table and the IB condition is
checked directly against CPT slices.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .assignments import Assignment
from .errors import EvidenceError, InfeasibleError, ResourceLimitError

MAX_STATES = 2**24
MAX_IB_NODES = 12


class JointTable:
    """Probability of every complete assignment, axes in node-index order."""

    def __init__(self, net):
        n_states = net.state_count()
        if n_states > MAX_STATES:
            raise ResourceLimitError(f"joint table of {n_states} states exceeds {MAX_STATES}")
        self.net = net
        shape = tuple(len(d) for d in net.domains)
        joint = np.ones(shape)
        for v in net.nodes:
            axes = list(net.parents[v]) + [v]
            factor = net.cpt_tensor(v)
            perm = np.argsort(axes)
            factor = factor.transpose(perm)
            bshape = [1] * len(shape)
            for ax in sorted(axes):
                bshape[ax] = shape[ax]
            joint = joint * factor.reshape(bshape)
        self.table = joint

    @property
    def size(self) -> int:
        return self.table.size

    def event(self, a) -> float:
        idx = tuple(a.get(v, slice(None)) for v in self.net.nodes)
        return float(np.sum(self.table[idx]))


@lru_cache(maxsize=16)
def joint_table(net) -> JointTable:
    return JointTable(net)


def exact_event(net, a) -> float:
    return joint_table(net).event(a)


def exact_posterior(net, evidence, query: int) -> np.ndarray:
    if query in evidence:
        raise EvidenceError("query node is assigned by the evidence")
    jt = joint_table(net)
    ev = Assignment(evidence)
    p_e = jt.event(ev)
    if p_e <= 0.0:
        raise InfeasibleError("evidence has zero probability")
    out = np.empty(len(net.domains[query]))
    for qv in range(len(out)):
        m = dict(evidence)
        m[query] = qv
        out[qv] = jt.event(Assignment(m)) / p_e
    return out


def _ib_at(net, v: int, d: int, assigned: dict) -> bool:
    table = net.cpt_tensor(v)[..., d]
    idx = tuple(assigned.get(p, slice(None)) for p in net.parents[v])
    block = np.asarray(table[idx])
    return bool(block.max() == block.min())


def all_ib_assignments(net, index, evidence, query: int) -> list[tuple[Assignment, float]]:
    """Every minimal, properly supported IB assignment extending the evidence
    and some value of the query, with positive probability, sorted by
    descending probability.

    Minimal means no proper subset is itself such an assignment; those are
    exactly the assignments reached by choosing one compatible hypercube per
    assigned node.  ``index`` is accepted for interface symmetry and unused.
    """
    del index
    if len(net) > MAX_IB_NODES:
        raise ResourceLimitError(f"exhaustive IB enumeration limited to {MAX_IB_NODES} nodes")
    if query in evidence:
        raise EvidenceError("query node is assigned by the evidence")
    jt = joint_table(net)
    order = list(reversed(net.topo_order))
    pos = {v: i for i, v in enumerate(order)}
    # nodes whose parents are all decided once order[i] is decided
    ready_at = [[] for _ in order]
    for v in net.nodes:
        if net.parents[v]:
            ready_at[max(pos[p] for p in net.parents[v])].append(v)

    found = []
    for qv in range(len(net.domains[query])):
        forced = dict(evidence)
        forced[query] = qv
        assigned: dict[int, int] = {}

        def visit(i):
            if i == len(order):
                a = Assignment(assigned)
                p = jt.event(a)
                if p > 0.0:
                    found.append((a, p))
                return
            v = order[i]
            if v in forced:
                options = [forced[v]]
            elif any(c in assigned for c in net.children[v]):
                options = [None] + list(range(len(net.domains[v])))
            else:
                options = [None]
            for d in options:
                if d is not None:
                    assigned[v] = d
                if all(c not in assigned or _ib_at(net, c, assigned[c], assigned) for c in ready_at[i]):
                    visit(i + 1)
                if d is not None:
                    del assigned[v]

        visit(0)

    members = {a for a, _ in found}
    minimal = [(a, p) for a, p in found if not _has_proper_subset(a, members, evidence, query)]
    minimal.sort(key=lambda ap: (-ap[1], len(ap[0]), ap[0].pairs))
    return minimal


def _has_proper_subset(a, members, evidence, query):
    optional = [v for v in a if v not in evidence and v != query]
    for r in range(len(optional)):
        for kept in itertools.combinations(optional, r):
            keep = set(kept) | set(evidence) | {query}
            if a.restrict(keep) in members:
                return True
    return False


def top_complete(net, n: int) -> list[tuple[Assignment, float]]:
    """The ``n`` most probable complete assignments, ties in lexicographic order."""
    if n <= 0:
        return []
    jt = joint_table(net)
    flat = jt.table.ravel()
    order = np.argsort(-flat, kind="stable")[:n]
    shape = jt.table.shape
    out = []
    for k in order:
        values = np.unravel_index(int(k), shape)
        out.append((Assignment(enumerate(int(x) for x in values)), float(flat[k])))
    return out
