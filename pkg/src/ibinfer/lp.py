"""Dense bounded-variable primal simplex.

Solves ``min c.x  s.t.  A x (<=, =, >=) b,  0 <= x <= u`` with a two-phase
tableau method.  Nonbasic variables sit at either bound, so the ``x <= 1``
bounds of 0-1 relaxations never become rows.  Entering and leaving choices
use the most improving reduced cost, falling back to Bland's smallest-index
rule after a run of degenerate pivots so that the method cannot cycle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError

LE, EQ, GE = -1, 0, 1
PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_RUN = 30


@dataclass
class LpResult:
    status: str  # "optimal" or "infeasible"
    x: np.ndarray
    objective: float
    iterations: int


class _Tableau:
    def __init__(self, T, xB, basis, upper, at_upper):
        self.T = T
        self.xB = xB
        self.basis = basis
        self.upper = upper
        self.at_upper = at_upper
        self.is_basic = np.zeros(T.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0

    def pivot(self, r, q):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        rows = np.flatnonzero(col)
        if rows.size:
            T[rows] -= col[rows, None] * T[r]
        T[:, q] = 0.0
        T[r, q] = 1.0
        leaving = self.basis[r]
        self.is_basic[leaving] = False
        self.is_basic[q] = True
        self.basis[r] = q
        return leaving

    def optimize(self, cost, deadline=None, max_iter=1_000_000):
        T, upper = self.T, self.upper
        d = cost - cost[self.basis] @ T
        stalled = 0
        while True:
            self.iterations += 1
            if self.iterations > max_iter:
                raise RuntimeError("simplex iteration limit reached")
            if deadline is not None and self.iterations % 64 == 1 and time.monotonic() > deadline:
                raise ResourceLimitError("time limit exceeded")
            movable = ~self.is_basic & (upper > 0.0)
            eligible = movable & np.where(self.at_upper, d > PIVOT_TOL, d < -PIVOT_TOL)
            cand = np.flatnonzero(eligible)
            if cand.size == 0:
                return
            if stalled < DEGENERATE_RUN:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            else:
                q = int(cand[0])
            sigma = -1.0 if self.at_upper[q] else 1.0
            alpha = sigma * T[:, q]
            xB = self.xB
            ub = upper[self.basis]
            ratios = np.full(alpha.shape, np.inf)
            dec = alpha > PIVOT_TOL
            ratios[dec] = np.maximum(xB[dec], 0.0) / alpha[dec]
            inc = (alpha < -PIVOT_TOL) & np.isfinite(ub)
            ratios[inc] = np.maximum(ub[inc] - xB[inc], 0.0) / -alpha[inc]
            t_rows = ratios.min() if ratios.size else np.inf
            t_flip = upper[q]
            if t_flip <= t_rows:
                if not np.isfinite(t_flip):
                    raise RuntimeError("unbounded linear program")
                stalled = 0
                self.xB = xB - t_flip * alpha
                self.at_upper[q] = not self.at_upper[q]
                continue
            stalled = stalled + 1 if t_rows <= PIVOT_TOL else 0
            ties = np.flatnonzero(ratios <= t_rows + PIVOT_TOL)
            r = int(ties[np.argmin(self.basis[ties])])
            to_upper = alpha[r] < 0
            entering_value = t_rows if sigma > 0 else upper[q] - t_rows
            self.xB = xB - t_rows * alpha
            leaving = self.pivot(r, q)
            self.xB[r] = entering_value
            self.at_upper[leaving] = to_upper
            self.at_upper[q] = False
            d = d - d[q] * T[r]
            d[q] = 0.0

    def values(self):
        x = np.where(self.at_upper, self.upper, 0.0)
        x[self.basis] = self.xB
        return x


def simplex(c, A, senses, b, upper=None, deadline=None) -> LpResult:
    """Minimise ``c.x`` subject to row constraints and ``0 <= x <= upper``.

    ``senses`` holds ``LE``, ``EQ`` or ``GE`` per row; ``upper`` defaults to
    ones (0-1 relaxation).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    b = np.asarray(b, dtype=float).copy()
    senses = np.asarray(senses, dtype=int)
    m = b.size
    A = np.asarray(A, dtype=float).reshape(m, n)
    if n == 0:
        ok = np.where(senses == LE, b >= -FEAS_TOL, np.where(senses == GE, b <= FEAS_TOL, np.abs(b) <= FEAS_TOL))
        if ok.all():
            return LpResult("optimal", np.zeros(0), 0.0, 0)
        return LpResult("infeasible", np.zeros(0), np.inf, 0)
    upper = np.ones(n) if upper is None else np.asarray(upper, dtype=float)

    if m == 0:
        x = np.where(c < 0, upper, 0.0)
        return LpResult("optimal", x, float(c @ x), 0)

    n_slack = int(np.count_nonzero(senses != EQ))
    S = np.zeros((m, n_slack))
    slack_of_row = np.full(m, -1)
    k = 0
    for i in range(m):
        if senses[i] != EQ:
            S[i, k] = 1.0 if senses[i] == LE else -1.0
            slack_of_row[i] = n + k
            k += 1
    M = np.hstack([A, S])
    neg = b < 0
    M[neg] *= -1.0
    b[neg] *= -1.0

    basis = np.empty(m, dtype=int)
    need_art = []
    for i in range(m):
        s = slack_of_row[i]
        if s >= 0 and M[i, s] > 0:
            basis[i] = s
        else:
            need_art.append(i)
    n_main = n + n_slack
    art = np.zeros((m, len(need_art)))
    for k, i in enumerate(need_art):
        art[i, k] = 1.0
        basis[i] = n_main + k
    T = np.hstack([M, art])
    n_tot = T.shape[1]
    bounds = np.concatenate([upper, np.full(n_slack + len(need_art), np.inf)])
    tab = _Tableau(T, b.copy(), basis, bounds, np.zeros(n_tot, dtype=bool))

    if need_art:
        phase1 = np.zeros(n_tot)
        phase1[n_main:] = 1.0
        tab.optimize(phase1, deadline)
        infeas = float(phase1 @ tab.values())
        if infeas > FEAS_TOL * max(1.0, np.abs(b).max()):
            return LpResult("infeasible", np.zeros(n), np.inf, tab.iterations)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if tab.basis[r] < n_main:
                continue
            row = np.abs(tab.T[r, :n_main])
            row[tab.is_basic[:n_main]] = 0.0
            cand = np.flatnonzero(row > PIVOT_TOL)
            if cand.size == 0:
                keep[r] = False
                continue
            q = int(cand[0])
            value = bounds[q] if tab.at_upper[q] else 0.0
            tab.pivot(r, q)
            tab.xB[r] = value
            tab.at_upper[q] = False
        tab.T = tab.T[keep][:, :n_main]
        tab.xB = tab.xB[keep]
        tab.basis = tab.basis[keep]
        tab.upper = bounds[:n_main]
        tab.at_upper = tab.at_upper[:n_main]
        tab.is_basic = tab.is_basic[:n_main]

    cost = np.concatenate([c, np.zeros(tab.T.shape[1] - n)])
    tab.optimize(cost, deadline)
    x = np.clip(tab.values()[:n], 0.0, upper)
    return LpResult("optimal", x, float(c @ x), tab.iterations)
