"""Discrete belief networks: storage, JSON I/O, graph queries and pruning.

A network is a DAG of discrete nodes.  Every node carries a conditional
probability table (CPT) with one row per full configuration of its parents,
enumerated lexicographically with the last parent varying fastest, and one
column per value of the node's domain.
"""

from __future__ import annotations

import heapq
import io
import json
import math
import os
from collections import deque
from typing import Iterable, Mapping

import numpy as np

from .errors import EvidenceError, NetworkError

ROW_TOL = 1e-9

Evidence = dict  # node index -> value index


class BeliefNetwork:
    """Immutable discrete Bayesian network.

    Parameters
    ----------
    names : sequence of str
        Node labels; position in the sequence is the node index.
    domains : sequence of sequence of str
        Value labels of every node.
    parents : sequence of sequence of int
        Parent indices of every node, in table order.
    cpts : sequence of array_like
        Per node, a ``(n_parent_configs, domain_size)`` table.
    """

    def __init__(self, names, domains, parents, cpts):
        self.names = tuple(str(n) for n in names)
        self.domains = tuple(tuple(str(v) for v in d) for d in domains)
        self.parents = tuple(tuple(int(p) for p in ps) for ps in parents)
        n = len(self.names)
        if not (len(self.domains) == len(self.parents) == len(cpts) == n):
            raise NetworkError("names, domains, parents and cpts differ in length")
        if len(set(self.names)) != n:
            raise NetworkError("duplicate node names")
        self._index = {name: i for i, name in enumerate(self.names)}

        for v, ps in enumerate(self.parents):
            if not self.domains[v]:
                raise NetworkError(f"node {self.names[v]!r} has an empty domain")
            if len(set(self.domains[v])) != len(self.domains[v]):
                raise NetworkError(f"node {self.names[v]!r} has duplicate values")
            if len(set(ps)) != len(ps):
                raise NetworkError(f"node {self.names[v]!r} lists a parent twice")
            for p in ps:
                if not 0 <= p < n:
                    raise NetworkError(f"node {self.names[v]!r} has dangling parent {p}")

        tables = []
        for v, raw in enumerate(cpts):
            table = np.array(raw, dtype=float)
            n_rows = math.prod(len(self.domains[p]) for p in self.parents[v])
            if table.ndim != 2 or table.shape != (n_rows, len(self.domains[v])):
                raise NetworkError(
                    f"cpt of {self.names[v]!r} has shape {table.shape}, "
                    f"expected {(n_rows, len(self.domains[v]))}"
                )
            if np.any(table < 0.0) or np.any(table > 1.0) or not np.all(np.isfinite(table)):
                raise NetworkError(f"cpt of {self.names[v]!r} has entries outside [0, 1]")
            sums = table.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
            if bad.size:
                raise NetworkError(
                    f"cpt row {int(bad[0])} of {self.names[v]!r} sums to {sums[bad[0]]!r}"
                )
            table.setflags(write=False)
            tables.append(table)
        self.cpts = tuple(tables)

        children = [[] for _ in range(n)]
        for v, ps in enumerate(self.parents):
            for p in ps:
                children[p].append(v)
        self.children = tuple(tuple(c) for c in children)
        self.topo_order = self._toposort()
        self._topo_pos = {v: i for i, v in enumerate(self.topo_order)}

    # -- basic accessors ---------------------------------------------------

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        return f"BeliefNetwork({len(self)} nodes, {sum(map(len, self.parents))} edges)"

    @property
    def nodes(self):
        return range(len(self.names))

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise EvidenceError(f"unknown node {name!r}") from None

    def value_index(self, node: int, label: str) -> int:
        try:
            return self.domains[node].index(str(label))
        except ValueError:
            raise EvidenceError(
                f"node {self.names[node]!r} has no value {label!r}"
            ) from None

    def topo_position(self, node: int) -> int:
        return self._topo_pos[node]

    def cpt_tensor(self, node: int) -> np.ndarray:
        """CPT reshaped to ``(|D_p1|, ..., |D_pk|, |D_v|)``."""
        shape = tuple(len(self.domains[p]) for p in self.parents[node])
        return self.cpts[node].reshape(shape + (len(self.domains[node]),))

    def state_count(self) -> int:
        return math.prod(len(d) for d in self.domains)

    def edges(self):
        for v, ps in enumerate(self.parents):
            for p in ps:
                yield p, v

    def _toposort(self):
        indeg = [len(ps) for ps in self.parents]
        heap = [v for v in self.nodes if indeg[v] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for c in self.children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        if len(order) != len(self):
            stuck = sorted(self.names[v] for v in self.nodes if indeg[v] > 0)
            raise NetworkError(f"cycle detected among {stuck}")
        return tuple(order)

    # -- structure ---------------------------------------------------------

    def subnetwork(self, keep: Iterable[int]) -> "BeliefNetwork":
        """Restrict to an ancestrally closed node set, renumbering densely."""
        keep = sorted(set(keep))
        remap = {old: new for new, old in enumerate(keep)}
        for v in keep:
            for p in self.parents[v]:
                if p not in remap:
                    raise NetworkError("subnetwork node set is not ancestrally closed")
        return BeliefNetwork(
            [self.names[v] for v in keep],
            [self.domains[v] for v in keep],
            [[remap[p] for p in self.parents[v]] for v in keep],
            [self.cpts[v] for v in keep],
        )

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "name": self.names[v],
                    "domain": list(self.domains[v]),
                    "parents": [self.names[p] for p in self.parents[v]],
                    "cpt": self.cpts[v].tolist(),
                }
                for v in self.nodes
            ]
        }

    def semantically_equal(self, other: "BeliefNetwork") -> bool:
        return (
            self.names == other.names
            and self.domains == other.domains
            and self.parents == other.parents
            and all(np.array_equal(a, b) for a, b in zip(self.cpts, other.cpts))
        )


# -- JSON I/O ---------------------------------------------------------------


def from_dict(doc: Mapping) -> BeliefNetwork:
    try:
        raw_nodes = doc["nodes"]
        names = [str(n["name"]) for n in raw_nodes]
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network document: {exc}") from None
    index = {}
    for i, name in enumerate(names):
        if name in index:
            raise NetworkError(f"duplicate node name {name!r}")
        index[name] = i
    domains, parents, cpts = [], [], []
    for n in raw_nodes:
        try:
            domains.append([str(x) for x in n["domain"]])
            plist = []
            for p in n.get("parents", []):
                if p not in index:
                    raise NetworkError(f"node {n['name']!r} has dangling parent {p!r}")
                plist.append(index[p])
            parents.append(plist)
            cpts.append(n["cpt"])
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed node {n!r}: {exc}") from None
    try:
        return BeliefNetwork(names, domains, parents, cpts)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NetworkError):
            raise
        raise NetworkError(str(exc)) from None


def loads(data) -> BeliefNetwork:
    """Parse a network from JSON text or bytes."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"JSON parse error: {exc}") from None
    return from_dict(doc)


def load_network(source) -> BeliefNetwork:
    """Load a network from a path, a binary/text stream, or raw bytes."""
    if isinstance(source, (bytes, bytearray)):
        return loads(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return loads(fh.read())
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return loads(source.read())
    raise TypeError(f"cannot load a network from {type(source).__name__}")


def dumps(net: BeliefNetwork) -> str:
    return json.dumps(net.to_dict(), separators=(",", ":"))


# -- evidence ----------------------------------------------------------------


def parse_assignment_text(net: BeliefNetwork, text: str | None) -> dict:
    """Parse ``"A=1,B=0"`` into ``{node index: value index}``."""
    out = {}
    if not text:
        return out
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "=" not in token:
            raise EvidenceError(f"expected name=value, got {token!r}")
        name, label = (s.strip() for s in token.split("=", 1))
        v = net.index_of(name)
        d = net.value_index(v, label)
        if out.get(v, d) != d:
            raise EvidenceError(f"node {name!r} assigned twice")
        out[v] = d
    return out


def check_evidence(net: BeliefNetwork, evidence: Mapping[int, int]) -> dict:
    ev = {}
    for v, d in evidence.items():
        if not 0 <= v < len(net):
            raise EvidenceError(f"unknown node index {v}")
        if not 0 <= d < len(net.domains[v]):
            raise EvidenceError(f"node {net.names[v]!r} has no value index {d}")
        ev[int(v)] = int(d)
    return ev


# -- graph queries -----------------------------------------------------------


def topological_order(net: BeliefNetwork) -> list[int]:
    return list(net.topo_order)


def ancestors(net: BeliefNetwork, nodes: Iterable[int]) -> set[int]:
    """Strict and non-strict ancestors: the input nodes are included."""
    seen = set()
    stack = list(nodes)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(net.parents[v])
    return seen


def supported_set(net: BeliefNetwork, targets: Iterable[int]) -> set[int]:
    targets = list(targets)
    for t in targets:
        if not 0 <= t < len(net):
            raise EvidenceError(f"unknown node index {t}")
    return ancestors(net, targets)


def d_separated(net: BeliefNetwork, source: int, target: int, given: Iterable[int] = ()) -> bool:
    """Whether ``source`` and ``target`` are d-separated by ``given``.

    Reachability over (node, direction) pairs: a trail entering a node from
    a child may continue anywhere unless the node is observed; a trail
    entering from a parent continues to children when unobserved and back
    up to parents when the node or one of its descendants is observed.
    """
    given = set(given)
    for v in (source, target, *given):
        if not 0 <= v < len(net):
            raise EvidenceError(f"unknown node index {v}")
    if source == target:
        return source in given
    if source in given or target in given:
        return True
    observed_anc = ancestors(net, given)
    UP, DOWN = 0, 1
    visited = set()
    queue = deque([(source, UP)])
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v == target:
            return False
        if direction == UP and v not in given:
            queue.extend((p, UP) for p in net.parents[v])
            queue.extend((c, DOWN) for c in net.children[v])
        elif direction == DOWN:
            if v not in given:
                queue.extend((c, DOWN) for c in net.children[v])
            if v in observed_anc:
                queue.extend((p, UP) for p in net.parents[v])
    return True


def prune_for_query(net: BeliefNetwork, evidence: Mapping[int, int], query: Iterable[int]):
    """Drop irrelevant evidence and unsupported nodes before enumeration.

    Evidence nodes d-separated from every query node (given the rest of the
    evidence) are removed one at a time until none qualifies; the network is
    then restricted to the nodes supported by the query and the surviving
    evidence.  Returns ``(pruned_net, pruned_evidence)`` with indices of the
    pruned network; look nodes up by name to translate.
    """
    evidence = check_evidence(net, evidence)
    query = set(query)
    for q in query:
        if not 0 <= q < len(net):
            raise EvidenceError(f"unknown node index {q}")
        if q in evidence:
            raise EvidenceError(f"query node {net.names[q]!r} is assigned by the evidence")

    changed = True
    while changed:
        changed = False
        for e in sorted(evidence):
            rest = set(evidence) - {e}
            if all(d_separated(net, e, q, rest) for q in query):
                del evidence[e]
                changed = True
                break

    keep = sorted(supported_set(net, set(evidence) | query))
    sub = net.subnetwork(keep)
    remap = {old: new for new, old in enumerate(keep)}
    return sub, {remap[v]: d for v, d in evidence.items()}
