"""Backend-agnostic enumeration sessions.

A session streams IB assignments in non-increasing probability, files each
into the result set of its query value and keeps running marginal
estimates.  Backends implement ``_produce``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .assignments import Assignment
from .errors import EvidenceError, ResourceLimitError
from .mass import DEFAULT_TRUNC, AssignmentSet, posterior
from .network import check_evidence


@dataclass(frozen=True)
class Step:
    index: int
    assignment: Assignment
    probability: float
    total_mass: float
    elapsed: float


class EnumerationSession:
    backend = "abstract"

    def __init__(self, net, index, evidence, query: int, trunc: int | None = DEFAULT_TRUNC, timeout: float | None = None):
        evidence = check_evidence(net, evidence)
        if not 0 <= query < len(net):
            raise EvidenceError(f"unknown query node index {query}")
        if query in evidence:
            raise EvidenceError(f"query node {net.names[query]!r} is assigned by the evidence")
        self.net = net
        self.index = index
        self.evidence = evidence
        self.query = query
        self.trunc = trunc
        self.result_sets = [AssignmentSet(net, index, trunc) for _ in net.domains[query]]
        self.emitted: list[tuple[Assignment, float]] = []
        self.exhausted = False
        self.skipped = 0
        self._t0 = time.monotonic()
        self.deadline = None if timeout is None else self._t0 + timeout

    # backends override
    def _produce(self):
        raise NotImplementedError

    def _check_deadline(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ResourceLimitError("time limit exceeded")

    def next_ib(self):
        """Next IB assignment as ``(assignment, probability)``, or ``None`` when exhausted.

        Arrivals that contain an earlier result of the same query value are
        dropped: their event lies inside an accepted one.
        """
        if self.exhausted:
            return None
        while True:
            self._check_deadline()
            item = self._produce()
            if item is None:
                self.exhausted = True
                return None
            a, p = item
            rs = self.result_sets[a[self.query]]
            if rs.covers(a):
                self.skipped += 1
                continue
            rs.add(a)
            self.emitted.append((a, p))
            return a, p

    def __iter__(self):
        while True:
            item = self.next_ib()
            if item is None:
                return
            yield item

    def masses(self):
        return [rs.estimate for rs in self.result_sets]

    def total_mass(self) -> float:
        return sum(m.value for m in self.masses())

    def marginal_estimate(self):
        if not self.emitted:
            raise ValueError("no IB assignment accepted yet")
        return posterior(self.masses())

    def run(self, max_count=None, max_mass=None, max_seconds=None):
        """Advance until a budget is met or the stream is exhausted.

        At least one assignment is always attempted, whatever the budget.
        Returns the list of :class:`Step` records produced by this call.
        """
        steps = []
        start = time.monotonic()
        while True:
            if steps:
                if max_count is not None and len(self.emitted) >= max_count:
                    break
                if max_mass is not None and self.total_mass() >= max_mass:
                    break
                if max_seconds is not None and time.monotonic() - start >= max_seconds:
                    break
            elif max_count is not None and max_count <= len(self.emitted):
                break
            item = self.next_ib()
            if item is None:
                break
            a, p = item
            steps.append(Step(len(self.emitted), a, p, self.total_mass(), time.monotonic() - self._t0))
        return steps


def start_session(net, index, evidence, query: int, backend: str = "search", **kwargs) -> EnumerationSession:
    if backend == "search":
        from .search import SearchSession

        return SearchSession(net, index, evidence, query, **kwargs)
    if backend == "ilp":
        from .ilp import IlpSession

        return IlpSession(net, index, evidence, query, **kwargs)
    raise ValueError(f"unknown backend {backend!r}")
