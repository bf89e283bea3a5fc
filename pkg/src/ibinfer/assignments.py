"""Partial assignments and their algebra.

An assignment is a consistent set of ``(node, value)`` pairs, denoting the
event in which every listed node takes its listed value.  Note the duality:
the union of two assignments denotes the *intersection* of their events.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from typing import Iterable


class Assignment(Mapping):
    """Immutable, canonically ordered ``node -> value`` map.

    Equality, hashing and ordering use the pairs sorted by node index.
    """

    __slots__ = ("_map", "_items", "_hash")

    def __init__(self, pairs=()):
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        m = {}
        for v, d in items:
            v, d = int(v), int(d)
            if m.get(v, d) != d:
                raise ValueError(f"inconsistent assignment: node {v} given two values")
            m[v] = d
        self._set(m)

    def _set(self, m):
        self._map = m
        self._items = tuple(sorted(m.items()))
        self._hash = hash(self._items)

    @classmethod
    def _trusted(cls, m: dict) -> "Assignment":
        obj = cls.__new__(cls)
        obj._set(m)
        return obj

    def __getitem__(self, node):
        return self._map[node]

    def __contains__(self, node):
        return node in self._map

    def __iter__(self):
        return (v for v, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Assignment):
            return self._items == other._items
        return NotImplemented

    def __lt__(self, other):
        return self._items < other._items

    def __repr__(self):
        body = ", ".join(f"{v}={d}" for v, d in self._items)
        return f"Assignment({{{body}}})"

    @property
    def pairs(self) -> tuple:
        return self._items

    @property
    def span(self) -> frozenset:
        return frozenset(self._map)

    def get(self, node, default=None):
        return self._map.get(node, default)

    def restrict(self, nodes: Iterable[int]) -> "Assignment":
        return Assignment._trusted({v: self._map[v] for v in nodes if v in self._map})


EMPTY = Assignment()


def compatible(a: Assignment, b: Assignment) -> bool:
    if len(a) > len(b):
        a, b = b, a
    bm = b._map
    for v, d in a._items:
        if bm.get(v, d) != d:
            return False
    return True


def union(a: Assignment, b: Assignment) -> Assignment:
    """The assignment holding the pairs of both inputs (event intersection)."""
    if len(a) < len(b):
        a, b = b, a
    m = dict(a._map)
    for v, d in b._items:
        if m.setdefault(v, d) != d:
            raise ValueError(f"incompatible assignments: node {v} conflicts")
    if len(m) == len(a):
        return a
    return Assignment._trusted(m)


def subsumed_by(a: Assignment, b: Assignment) -> bool:
    """True iff every pair of ``a`` appears in ``b`` (``a`` is a subset of ``b``)."""
    if len(a) > len(b):
        return False
    bm = b._map
    return all(bm.get(v, -1) == d for v, d in a._items)


def is_ib(net, index, a: Assignment) -> bool:
    return all(index.factor(v, d, a) is not None for v, d in a.pairs)


def log_probability(net, index, a: Assignment) -> float:
    total = 0.0
    for v, d in a.pairs:
        p = index.factor(v, d, a)
        if p is None:
            raise ValueError(f"assignment is not IB at node {net.names[v]!r}")
        if p <= 0.0:
            return -math.inf
        total += math.log(p)
    return total


def probability(net, index, a: Assignment) -> float:
    """Event probability of an IB assignment as a product of cube entries."""
    return math.exp(log_probability(net, index, a))


def properly_supported(net, a: Assignment, anchors: Iterable[int]) -> bool:
    """Every assigned node reaches an anchor along a path of assigned nodes."""
    span = a.span
    reached = {v for v in anchors if v in span}
    stack = list(reached)
    while stack:
        v = stack.pop()
        for p in net.parents[v]:
            if p in span and p not in reached:
                reached.add(p)
                stack.append(p)
    return len(reached) == len(span)


def format_assignment(net, a: Assignment) -> str:
    return ",".join(f"{net.names[v]}={net.domains[v][d]}" for v, d in a.pairs)


def parse_assignment(net, text: str) -> Assignment:
    from .network import parse_assignment_text

    return Assignment(parse_assignment_text(net, text))
