"""Anytime best-first enumeration of IB assignments.

States are partial assignments with a frontier of assigned nodes whose
IB condition is not yet secured.  Expanding a state picks the frontier node
latest in topological order and branches over every maximal hypercube for
its value that is compatible with the state.  The estimate is the product
of chosen cube probabilities, which never grows along a branch, so states
with an empty frontier leave the agenda in non-increasing probability.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

from .assignments import Assignment, compatible, union
from .errors import ResourceLimitError
from .session import EnumerationSession

# states held in the agenda plus the duplicate filter; best-first search on
# heavily conditioned networks can otherwise exhaust memory
MAX_STATES = 500_000


@dataclass(frozen=True)
class SearchState:
    assignment: Assignment
    frontier: frozenset
    log_estimate: float

    @property
    def estimate(self) -> float:
        return math.exp(self.log_estimate)

    @property
    def key(self):
        return (self.assignment, self.frontier)


class Agenda:
    """Max-priority queue on estimate; ties go to smaller spans, then to the
    lexicographically smaller canonical assignment."""

    def __init__(self):
        self._heap = []
        self._counter = itertools.count()

    def __len__(self):
        return len(self._heap)

    def push(self, state: SearchState):
        key = (
            -state.log_estimate,
            len(state.assignment),
            state.assignment.pairs,
            tuple(sorted(state.frontier)),
            next(self._counter),
        )
        heapq.heappush(self._heap, (key, state))

    def pop(self) -> SearchState:
        return heapq.heappop(self._heap)[1]


def expand(state: SearchState, net, index) -> list[SearchState]:
    v = max(state.frontier, key=net.topo_position)
    d = state.assignment[v]
    rest = state.frontier - {v}
    children = []
    for cid in index.by_node_value[(v, d)]:
        cube = index.cubes[cid]
        if cube.prob <= 0.0 or not compatible(cube.parent_part, state.assignment):
            continue
        added = cube.parent_part.span - state.assignment.span
        children.append(
            SearchState(
                union(state.assignment, cube.parent_part),
                rest | added,
                state.log_estimate + math.log(cube.prob),
            )
        )
    return children


class SearchSession(EnumerationSession):
    backend = "search"

    def __init__(self, net, index, evidence, query, max_states: int = MAX_STATES, **kwargs):
        super().__init__(net, index, evidence, query, **kwargs)
        self.max_states = max_states
        self.agenda = Agenda()
        self._seen = set()
        self.expanded = 0
        for qv in range(len(net.domains[query])):
            seed = dict(self.evidence)
            seed[query] = qv
            a = Assignment(seed)
            self.agenda.push(SearchState(a, a.span, 0.0))

    def _produce(self):
        while self.agenda:
            state = self.agenda.pop()
            if state.key in self._seen:
                continue
            self._seen.add(state.key)
            if not state.frontier:
                return state.assignment, state.estimate
            self.expanded += 1
            if self.expanded % 256 == 0:
                self._check_deadline()
                if len(self.agenda) + len(self._seen) > self.max_states:
                    raise ResourceLimitError(f"search exceeded {self.max_states} states")
            for child in expand(state, self.net, self.index):
                if child.key not in self._seen:
                    self.agenda.push(child)
        return None
