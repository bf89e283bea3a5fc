"""Probability mass of a union of IB assignments.

The union event is evaluated by inclusion-exclusion.  Every intersection
term is itself an IB assignment (the union of compatible IB assignments is
IB), so its probability is a product of hypercube entries.  Terms are kept
merged by their union assignment: adding a member only touches subsets that
contain it.

With a truncation order ``K`` the alternating partial sums give Bonferroni
brackets: stopping after an odd order over-estimates, after an even order
under-estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .assignments import Assignment, compatible, log_probability, subsumed_by, union

DEFAULT_TRUNC = 4


@dataclass(frozen=True)
class MassEstimate:
    value: float
    lower: float
    upper: float
    truncation_order: int | None
    exact: bool

    @classmethod
    def zero(cls, trunc) -> "MassEstimate":
        return cls(0.0, 0.0, 0.0, trunc, True)


class AssignmentSet:
    """Growing set of IB assignments with a running mass estimate.

    ``trunc=None`` keeps every inclusion-exclusion order (exact mass).
    Brackets are tightened over insertion prefixes, so the estimate is a
    function of the ordered member list and the same whether members are
    added one at a time or all at once.
    """

    def __init__(self, net, index, trunc: int | None = DEFAULT_TRUNC):
        if trunc is not None and trunc < 1:
            raise ValueError("truncation order must be >= 1")
        self.net = net
        self.index = index
        self.trunc = trunc
        self.members: list[Assignment] = []
        self._probs: list[float] = []
        self._pcache: dict[Assignment, float] = {}
        if trunc is None:
            self._coef: dict[Assignment, int] = {}
            self._exact_value = 0.0
        else:
            self._counts: dict[Assignment, np.ndarray] = {}
            self._order_sums = np.zeros(trunc)
        self._lower = 0.0
        self._upper = 0.0
        self._estimate = MassEstimate.zero(trunc)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def estimate(self) -> MassEstimate:
        return self._estimate

    @property
    def term_count(self) -> int:
        return len(self._coef) if self.trunc is None else len(self._counts)

    def prob(self, a: Assignment) -> float:
        try:
            return self._pcache[a]
        except KeyError:
            p = math.exp(log_probability(self.net, self.index, a))
            self._pcache[a] = p
            return p

    def covers(self, a: Assignment) -> bool:
        """True when a member is a subset of ``a``, so ``a`` adds no mass."""
        return any(subsumed_by(m, a) for m in self.members)

    def add(self, a: Assignment) -> MassEstimate:
        if self.covers(a):
            raise ValueError("assignment is subsumed by a member and adds no mass")
        p = self.prob(a)  # raises for non-IB input
        self.members.append(a)
        self._probs.append(p)
        if self.trunc is None:
            self._add_exact(a, p)
        else:
            self._add_truncated(a, p)
        return self._estimate

    def _add_exact(self, a, p):
        coef = self._coef
        delta = {a: 1}
        for u, c in coef.items():
            if compatible(u, a):
                w = union(u, a)
                delta[w] = delta.get(w, 0) - c
        gain = 0.0
        for w, c in delta.items():
            if c:
                gain += c * self.prob(w)
            nc = coef.get(w, 0) + c
            if nc:
                coef[w] = nc
            else:
                coef.pop(w, None)
        self._exact_value += gain
        v = min(max(self._exact_value, 0.0), 1.0)
        self._estimate = MassEstimate(v, v, v, None, True)

    def _add_truncated(self, a, p):
        K = self.trunc
        new = {}
        unit = np.zeros(K, dtype=np.int64)
        unit[0] = 1
        new[a] = unit
        if K > 1:
            for u, cnt in self._counts.items():
                if not cnt[: K - 1].any() or not compatible(u, a):
                    continue
                w = union(u, a)
                shifted = np.zeros(K, dtype=np.int64)
                shifted[1:] = cnt[: K - 1]
                if w in new:
                    new[w] = new[w] + shifted
                else:
                    new[w] = shifted
        for w, cnt in new.items():
            self._order_sums += cnt * self.prob(w)
            if w in self._counts:
                self._counts[w] = self._counts[w] + cnt
            else:
                self._counts[w] = cnt

        n = len(self.members)
        signs = np.array([1.0 if k % 2 == 0 else -1.0 for k in range(K)])
        partial = np.cumsum(signs * self._order_sums)
        top = min(n, K)
        if n <= K:
            v = float(min(max(partial[n - 1], 0.0), 1.0))
            self._lower = self._upper = v
            self._estimate = MassEstimate(v, v, v, K, True)
            return
        uppers = [partial[k] for k in range(0, top, 2)]  # orders 1, 3, ...
        lowers = [partial[k] for k in range(1, top, 2)]  # orders 2, 4, ...
        lower = max([self._lower, max(self._probs)] + lowers)
        upper = min([1.0, self._upper + p] + uppers)
        lower = max(lower, 0.0)
        upper = max(upper, lower)
        self._lower, self._upper = lower, upper
        self._estimate = MassEstimate(0.5 * (lower + upper), lower, upper, K, False)


def set_mass(members: Iterable[Assignment], trunc: int | None, net, index) -> MassEstimate:
    aset = AssignmentSet(net, index, trunc)
    for a in members:
        aset.add(a)
    return aset.estimate


def incremental_add(aset: AssignmentSet, a: Assignment) -> MassEstimate:
    return aset.add(a)


@dataclass(frozen=True)
class PosteriorEstimate:
    value: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]


def posterior(masses: Sequence[MassEstimate]) -> PosteriorEstimate:
    """Normalise per-value masses into a distribution with interval bounds.

    Result sets for different query values conflict on the query node, so
    their events are disjoint and the normaliser is the plain sum.
    """
    vals = [m.value for m in masses]
    total = sum(vals)
    if total <= 0.0:
        raise ValueError("no probability mass accumulated in any result set")
    lo = [m.lower for m in masses]
    hi = [m.upper for m in masses]
    value, lower, upper = [], [], []
    for i in range(len(masses)):
        value.append(vals[i] / total)
        others_hi = sum(hi) - hi[i]
        others_lo = sum(lo) - lo[i]
        den_lo = lo[i] + others_hi
        den_hi = hi[i] + others_lo
        lower.append(lo[i] / den_lo if den_lo > 0 else 0.0)
        upper.append(hi[i] / den_hi if den_hi > 0 else 1.0)
    return PosteriorEstimate(tuple(value), tuple(lower), tuple(upper))
