"""Random belief networks with context-specific independence.

Each CPT is grown as a random decision tree over the node's parents: a
region with ``r`` parents still unsplit is kept whole with probability
``csi_fraction ** r``, otherwise it is split on a random remaining parent.
Small regions are therefore merged more readily than the whole table, so
most nodes keep some dependence on their parents while sharing rows.
``csi_fraction = 1`` makes every node independent of its parents and
``csi_fraction = 0`` gives full tables.  One Dirichlet(1, ..., 1)
distribution is sampled per leaf region, so distinct regions differ almost surely while rows inside a region are
exactly equal, which is what hypercube extraction detects.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .network import BeliefNetwork


@dataclass(frozen=True)
class GenSpec:
    node_count: int = 10
    max_parents: int = 3
    domain_size_range: tuple = (2, 4)
    # relative weights of domain sizes lo..hi; None means uniform
    domain_weights: tuple | None = (0.15, 0.6, 0.25)
    csi_fraction: float = 0.6
    skew: float | None = None
    seed: int = 0

    def validate(self):
        lo, hi = self.domain_size_range
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if self.max_parents < 0:
            raise ValueError("max_parents must be non-negative")
        if not 1 <= lo <= hi:
            raise ValueError("invalid domain_size_range")
        if self.domain_weights is not None:
            w = np.asarray(self.domain_weights, dtype=float)
            if w.size != hi - lo + 1 or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("domain_weights must give one non-negative weight per size")
        if not 0.0 <= self.csi_fraction <= 1.0:
            raise ValueError("csi_fraction must lie in [0, 1]")
        if self.skew is not None and not 0.0 <= self.skew < 1.0:
            raise ValueError("skew must lie in [0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_seed(self, seed: int) -> "GenSpec":
        return replace(self, seed=int(seed))


def _distribution(rng, size, skew):
    p = rng.dirichlet(np.ones(size))
    if skew is not None and size > 1:
        j = int(rng.integers(size))
        p = (1.0 - skew) * p
        p[j] += skew
    return p


def _tree_table(rng, parent_sizes, size, csi, skew):
    k = len(parent_sizes)
    table = np.empty(tuple(parent_sizes) + (size,))

    def grow(fixed, free):
        if not free or rng.random() < csi ** len(free):
            idx = tuple(fixed.get(i, slice(None)) for i in range(k))
            table[idx] = _distribution(rng, size, skew)
            return
        pos = free[int(rng.integers(len(free)))]
        rest = [f for f in free if f != pos]
        for val in range(parent_sizes[pos]):
            grow({**fixed, pos: val}, rest)

    grow({}, list(range(k)))
    return table.reshape(-1, size)


def generate(spec: GenSpec) -> BeliefNetwork:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.node_count
    lo, hi = spec.domain_size_range
    choices = np.arange(lo, hi + 1)
    if spec.domain_weights is None:
        weights = None
    else:
        weights = np.asarray(spec.domain_weights, dtype=float)
        weights = weights / weights.sum()
    sizes = [int(s) for s in rng.choice(choices, size=n, p=weights)]

    parents = []
    for i in range(n):
        k = int(rng.integers(0, min(spec.max_parents, i) + 1))
        parents.append(sorted(int(p) for p in rng.choice(i, size=k, replace=False)) if k else [])

    tables = [
        _tree_table(rng, [sizes[p] for p in parents[i]], sizes[i], spec.csi_fraction, spec.skew)
        for i in range(n)
    ]

    # shuffle indices so that file order is not a topological order
    perm = [int(x) for x in rng.permutation(n)]
    inv = [0] * n
    for created, idx in enumerate(perm):
        inv[idx] = created
    return BeliefNetwork(
        [f"X{idx}" for idx in range(n)],
        [[str(v) for v in range(sizes[inv[idx]])] for idx in range(n)],
        [[perm[p] for p in parents[inv[idx]]] for idx in range(n)],
        [tables[inv[idx]] for idx in range(n)],
    )
