"""Maximal independence-based hypercubes extracted from CPTs.

A hypercube based on node ``v`` with value ``d`` fixes ``v = d`` and some of
``v``'s parents.  It is IB when ``P(v = d | parents)`` takes the same value
for every full parent configuration extending it, and maximal when no fixed
parent can be dropped without breaking that constancy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .assignments import Assignment, format_assignment
from .errors import ResourceLimitError

MAX_PARENTS = 20


@dataclass(frozen=True)
class Hypercube:
    base: int
    value: int
    parent_part: Assignment
    prob: float
    assignment: Assignment = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = dict(self.parent_part.items())
        m[self.base] = self.value
        object.__setattr__(self, "assignment", Assignment._trusted(m))

    @property
    def log_prob(self) -> float:
        return math.log(self.prob) if self.prob > 0 else -math.inf


def _constant(block: np.ndarray) -> bool:
    return bool(block.max() == block.min())


def extract_hypercubes(net, v: int, d: int) -> list[Hypercube]:
    """All maximal IB hypercubes for ``v = d``.

    Candidates are partial parent assignments visited by increasing size
    (then parent position, then value tuple), so each accepted cube is
    set-minimal: a candidate is skipped whenever an accepted cube is a
    subset of it.
    """
    parents = net.parents[v]
    k = len(parents)
    if k > MAX_PARENTS:
        raise ResourceLimitError(
            f"node {net.names[v]!r} has {k} parents; extraction supports at most {MAX_PARENTS}"
        )
    table = net.cpt_tensor(v)[..., d]
    sizes = [len(net.domains[p]) for p in parents]
    accepted: list[Hypercube] = []

    for r in range(k + 1):
        for positions in itertools.combinations(range(k), r):
            for values in itertools.product(*(range(sizes[i]) for i in positions)):
                part = {parents[i]: val for i, val in zip(positions, values)}
                if any(
                    all(part.get(p, -1) == val for p, val in cube.parent_part.items())
                    for cube in accepted
                ):
                    continue
                idx = [slice(None)] * k
                for i, val in zip(positions, values):
                    idx[i] = val
                block = table[tuple(idx)]
                if _constant(np.asarray(block)):
                    accepted.append(
                        Hypercube(v, d, Assignment._trusted(part), float(np.asarray(block).flat[0]))
                    )
    return accepted


class HypercubeIndex:
    """Per ``(node, value)`` lists of maximal hypercubes plus a reverse index.

    ``cubes`` holds every hypercube once; ``by_node_value[(v, d)]`` lists ids
    into it; ``containing[(p, e)]`` lists ids of cubes whose parent part
    assigns ``p = e``.
    """

    def __init__(self, net, cubes_per_nv: dict):
        self.net = net
        self.cubes: list[Hypercube] = []
        self.by_node_value: dict[tuple[int, int], tuple[int, ...]] = {}
        self.by_node: dict[int, tuple[int, ...]] = {}
        self.containing: dict[tuple[int, int], list[int]] = {}
        for v in net.nodes:
            node_ids = []
            for d in range(len(net.domains[v])):
                ids = []
                for cube in cubes_per_nv[(v, d)]:
                    cid = len(self.cubes)
                    self.cubes.append(cube)
                    ids.append(cid)
                    for p, e in cube.parent_part.items():
                        self.containing.setdefault((p, e), []).append(cid)
                self.by_node_value[(v, d)] = tuple(ids)
                node_ids.extend(ids)
            self.by_node[v] = tuple(node_ids)
        self._factor_cache: dict = {}

    def __len__(self):
        return len(self.cubes)

    def for_value(self, v: int, d: int) -> list[Hypercube]:
        return [self.cubes[i] for i in self.by_node_value[(v, d)]]

    def factor(self, v: int, d: int, a: Assignment):
        """Probability of ``v = d`` given ``a`` if some cube of ``(v, d)`` lies in ``a``."""
        key = (v, d, tuple(a.get(p, -1) for p in self.net.parents[v]))
        try:
            return self._factor_cache[key]
        except KeyError:
            pass
        found = None
        for cid in self.by_node_value[(v, d)]:
            cube = self.cubes[cid]
            if all(a.get(p, -1) == e for p, e in cube.parent_part.items()):
                found = cube.prob
                break
        self._factor_cache[key] = found
        return found

    def dump(self) -> str:
        lines = []
        for cube in self.cubes:
            head = f"{self.net.names[cube.base]}={self.net.domains[cube.base][cube.value]}"
            body = format_assignment(self.net, cube.parent_part)
            sep = " | " + body + " : " if body else " | : "
            lines.append(f"{head}{sep}{cube.prob:.9g}")
        return "\n".join(lines) + "\n"


def build_index(net) -> HypercubeIndex:
    cubes = {
        (v, d): extract_hypercubes(net, v, d)
        for v in net.nodes
        for d in range(len(net.domains[v]))
    }
    return HypercubeIndex(net, cubes)
