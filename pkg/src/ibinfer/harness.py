"""Run reports and the benchmark experiments behind the command line.

Everything here returns plain data plus CSV text; argument parsing and exit
codes live in :mod:`ibinfer.cli`.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .assignments import format_assignment
from .errors import InfeasibleError
from .generator import GenSpec, generate
from .hypercubes import build_index
from .mass import DEFAULT_TRUNC, AssignmentSet, posterior
from .network import ancestors, prune_for_query
from .session import start_session


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def sub_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent 64-bit seeds split deterministically from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


@dataclass
class Prepared:
    net: object  # pruned network
    evidence: dict
    query: int
    index: object


def prepare(net, evidence, query: int) -> Prepared:
    """Prune for the query and build the hypercube index of what is left."""
    pnet, pev = prune_for_query(net, evidence, {query})
    pq = pnet.index_of(net.names[query])
    return Prepared(pnet, pev, pq, build_index(pnet))


# -- enumeration reports -------------------------------------------------------


@dataclass
class RunRecord:
    step: int
    assignment: str
    probability: float
    cumulative_mass: float
    elapsed: float
    estimate: tuple
    lower: tuple
    upper: tuple


@dataclass
class RunReport:
    backend: str
    query: str
    labels: list
    records: list = field(default_factory=list)
    exhausted: bool = False

    @property
    def total_mass(self) -> float:
        return self.records[-1].cumulative_mass if self.records else 0.0

    def to_csv(self, timing: bool = False) -> str:
        header = ["step", "assignment", "probability", "cumulative_mass"]
        if timing:
            header.append("elapsed")
        for lab in self.labels:
            header += [f"p_{lab}", f"lower_{lab}", f"upper_{lab}"]
        rows = []
        for r in self.records:
            row = [r.step, r.assignment, fmt(r.probability), fmt(r.cumulative_mass)]
            if timing:
                row.append(fmt(r.elapsed))
            for i in range(len(self.labels)):
                row += [fmt(r.estimate[i]), fmt(r.lower[i]), fmt(r.upper[i])]
            rows.append(row)
        return _csv_text(header, rows)


def _zero_evidence_check(session):
    if session.exhausted and not session.emitted:
        raise InfeasibleError("evidence has zero probability")


def enumerate_report(net, evidence, query: int, top: int, backend="search", trunc=DEFAULT_TRUNC, timeout=None) -> RunReport:
    prep = prepare(net, evidence, query)
    labels = list(prep.net.domains[prep.query])
    report = RunReport(backend, net.names[query], labels)
    if top <= 0:
        return report
    session = start_session(prep.net, prep.index, prep.evidence, prep.query, backend=backend, trunc=trunc, timeout=timeout)
    steps = session.run(max_count=top)
    report.exhausted = session.exhausted
    _zero_evidence_check(session)
    replay = _estimate_replay(prep, trunc)
    for s in steps:
        est = replay(s.assignment)
        report.records.append(
            RunRecord(
                s.index,
                format_assignment(prep.net, s.assignment),
                s.probability,
                s.total_mass,
                s.elapsed,
                est.value,
                est.lower,
                est.upper,
            )
        )
    return report


def _estimate_replay(prep: Prepared, trunc):
    """Re-add accepted assignments to fresh result sets, yielding the
    posterior estimate as it stood after each step."""
    sets = [AssignmentSet(prep.net, prep.index, trunc) for _ in prep.net.domains[prep.query]]

    def add(a):
        sets[a[prep.query]].add(a)
        return posterior([s.estimate for s in sets])

    return add


@dataclass
class MarginalReport:
    labels: list
    value: tuple
    lower: tuple
    upper: tuple
    total_mass: float
    count: int
    exhausted: bool

    @property
    def residual(self) -> float:
        return max(0.0, 1.0 - self.total_mass)

    def to_text(self) -> str:
        lines = [
            f"{lab}\t{fmt(v)}\t[{fmt(lo)}, {fmt(hi)}]"
            for lab, v, lo, hi in zip(self.labels, self.value, self.lower, self.upper)
        ]
        lines.append(f"assignments\t{self.count}")
        lines.append(f"mass\t{fmt(self.total_mass)}")
        lines.append(f"residual\t{fmt(self.residual)}")
        lines.append(f"exhausted\t{'yes' if self.exhausted else 'no'}")
        return "\n".join(lines) + "\n"


def marginal_report(
    net,
    evidence,
    query: int,
    backend="search",
    trunc=DEFAULT_TRUNC,
    max_count=None,
    max_mass=None,
    max_seconds=None,
    timeout=None,
) -> MarginalReport:
    prep = prepare(net, evidence, query)
    session = start_session(prep.net, prep.index, prep.evidence, prep.query, backend=backend, trunc=trunc, timeout=timeout)
    session.run(max_count=max_count, max_mass=max_mass, max_seconds=max_seconds)
    _zero_evidence_check(session)
    est = session.marginal_estimate()
    return MarginalReport(
        list(prep.net.domains[prep.query]),
        est.value,
        est.lower,
        est.upper,
        session.total_mass(),
        len(session.emitted),
        session.exhausted,
    )


# -- mass accumulation bench ---------------------------------------------------


def sink_query(net) -> int:
    return net.topo_order[-1]


@dataclass
class MassCurves:
    seeds: list
    ib: np.ndarray  # networks x steps, exact union mass after k assignments
    complete: np.ndarray  # networks x steps, mass of the k best complete assignments

    def summary_csv(self) -> str:
        rows = []
        for k in range(self.ib.shape[1]):
            rows.append(
                [k + 1, fmt(self.ib[:, k].mean()), fmt(self.ib[:, k].min()), fmt(self.complete[:, k].mean())]
            )
        return _csv_text(["step", "mean_ib_mass", "min_ib_mass", "mean_complete_mass"], rows)

    def per_network_csv(self) -> str:
        rows = []
        for i, seed in enumerate(self.seeds):
            for k in range(self.ib.shape[1]):
                rows.append([i, seed, k + 1, fmt(self.ib[i, k]), fmt(self.complete[i, k])])
        return _csv_text(["network", "seed", "step", "ib_mass", "complete_mass"], rows)


def _padded(values, n):
    out = np.empty(n)
    last = 0.0
    for k in range(n):
        if k < len(values):
            last = values[k]
        out[k] = last
    return out


def mass_curves(spec: GenSpec, networks: int, top: int, backend="search", seed: int = 0, timeout=None) -> MassCurves:
    """Mass accumulated by the first ``top`` IB assignments of each network
    against the ``top`` most probable complete assignments.

    The query is the last node in topological order and there is no
    evidence, so IB mass and complete-assignment mass are both fractions of
    the whole probability space.
    """
    seeds = sub_seeds(seed, networks)
    ib = np.zeros((networks, top))
    comp = np.zeros((networks, top))
    for i, s in enumerate(seeds):
        net = generate(spec.with_seed(s))
        prep = prepare(net, {}, sink_query(net))
        session = start_session(prep.net, prep.index, {}, prep.query, backend=backend, trunc=None, timeout=timeout)
        steps = session.run(max_count=top) if top > 0 else []
        ib[i] = _padded([st.total_mass for st in steps], top)
        comp[i] = _padded(np.cumsum([p for _, p in oracle.top_complete(net, top)]), top)
    return MassCurves(seeds, ib, comp)


# -- scaling bench ---------------------------------------------------------------


def forward_sample(net, rng) -> dict:
    x = {}
    for v in net.topo_order:
        row = net.cpt_tensor(v)[tuple(x[p] for p in net.parents[v])]
        x[v] = int(rng.choice(len(row), p=row))
    return x


def scale_workload(net, evidence_sinks: int, seed: int):
    """Evidence on the last ``evidence_sinks`` sinks in topological order,
    with values from one forward sample (so the evidence is possible).

    The query is the root that is an ancestor of the most evidence nodes
    (earliest in topological order on ties); a sink never lies inside a
    directed path, so such a root stays connected to the evidence after
    pruning.
    """
    rng = np.random.default_rng(seed)
    x = forward_sample(net, rng)
    sinks = [v for v in net.topo_order if not net.children[v]]
    roots = [v for v in net.topo_order if not net.parents[v]]
    chosen = sinks[len(sinks) - evidence_sinks :] if evidence_sinks > 0 else []
    reach = {r: 0 for r in roots}
    for e in chosen:
        for a in ancestors(net, [e]):
            if a in reach:
                reach[a] += 1
    query = max(roots, key=lambda r: (reach[r], -net.topo_position(r)))
    return {v: x[v] for v in chosen if v != query}, query


@dataclass
class ScaleRecord:
    network: int
    seed: int
    nodes: int
    pruned_nodes: int
    evidence: int
    hypercubes: int
    first_probability: float
    first_seconds: float
    found: int
    total_seconds: float


SCALE_HEADER = [
    "network",
    "seed",
    "nodes",
    "pruned_nodes",
    "evidence",
    "hypercubes",
    "first_probability",
    "first_seconds",
    "found",
    "total_seconds",
]


def scale_run(spec: GenSpec, networks=1, top=1, backend="ilp", evidence_sinks=20, seed=0, timeout=None) -> list[ScaleRecord]:
    out = []
    for i, s in enumerate(sub_seeds(seed, networks)):
        net = generate(spec.with_seed(s))
        evidence, query = scale_workload(net, evidence_sinks, s)
        t0 = time.monotonic()
        prep = prepare(net, evidence, query)
        session = start_session(prep.net, prep.index, prep.evidence, prep.query, backend=backend, trunc=DEFAULT_TRUNC, timeout=timeout)
        first = session.next_ib()
        if first is None:
            raise InfeasibleError("no IB assignment for the sampled evidence")
        t_first = time.monotonic() - t0
        if top > 1:
            session.run(max_count=top)
        t_all = time.monotonic() - t0
        out.append(
            ScaleRecord(i, s, len(net), len(prep.net), len(prep.evidence), len(prep.index), first[1], t_first, len(session.emitted), t_all)
        )
    return out


def scale_csv(records) -> str:
    rows = [
        [r.network, r.seed, r.nodes, r.pruned_nodes, r.evidence, r.hypercubes, fmt(r.first_probability), fmt(r.first_seconds), r.found, fmt(r.total_seconds)]
        for r in records
    ]
    return _csv_text(SCALE_HEADER, rows)
