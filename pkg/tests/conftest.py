import re
from pathlib import Path

import numpy as np
import pytest

from ibinfer import BeliefNetwork, GenSpec, build_index, generate, load_network
from ibinfer.harness import forward_sample  # noqa: F401  re-exported for tests

DATA = Path(__file__).parent / "data"
NET3_PATH = DATA / "net3.json"

# node indices of the NET3 fixture
A, B, C = 0, 1, 2


@pytest.fixture
def net3():
    return load_network(NET3_PATH)


@pytest.fixture
def net3_index(net3):
    return build_index(net3)


def chain(*names):
    """Binary chain ``names[0] -> names[1] -> ...`` with arbitrary tables."""
    domains = [["0", "1"]] * len(names)
    parents = [[]] + [[i - 1] for i in range(1, len(names))]
    cpts = [[[0.3, 0.7]]] + [[[0.9, 0.1], [0.2, 0.8]] for _ in names[1:]]
    return BeliefNetwork(names, domains, parents, cpts)


def small_networks(count, node_count=6, max_parents=2, csi=0.6, first_seed=0):
    return [
        generate(GenSpec(node_count=node_count, max_parents=max_parents, csi_fraction=csi, seed=first_seed + s))
        for s in range(count)
    ]


def random_ib(net, index, rng, seeds=None):
    """Random IB assignment: start from a few random (node, value) pairs and
    secure each assigned node with a randomly chosen compatible cube."""
    from ibinfer import Assignment, compatible, union

    if seeds is None:
        k = int(rng.integers(1, 3))
        nodes = rng.choice(len(net), size=k, replace=False)
        seeds = {int(v): int(rng.integers(len(net.domains[v]))) for v in nodes}
    a = Assignment(seeds)
    pending = list(a)
    secured = set()
    while pending:
        v = pending.pop()
        if v in secured:
            continue
        secured.add(v)
        options = [c for c in index.for_value(v, a[v]) if compatible(c.parent_part, a)]
        cube = options[int(rng.integers(len(options)))]
        a = union(a, cube.parent_part)
        pending.extend(p for p in cube.parent_part if p not in secured)
    return a


def parse_lp_text(text):
    """Independent reader for ``InequalitySystem.to_lp_text``."""
    lines = text.strip().splitlines()
    names = re.findall(r"[+-][0-9.e+-]+ (\w+)", lines[0])
    col = {n: j for j, n in enumerate(names)}
    cost = np.array([float(t) for t in re.findall(r"([+-][0-9.e+-]+) \w+", lines[0])])
    rows, lo, hi = [], [], []
    for line in lines[1:]:
        body, rel, rhs = re.match(r"\w+: (.*) (<=|>=|=) (\S+)$", line).groups()
        coeffs = np.zeros(len(names))
        for c, n in re.findall(r"([+-][0-9.e+-]+) (\w+)", body):
            coeffs[col[n]] = float(c)
        rows.append(coeffs)
        r = float(rhs)
        lo.append(-np.inf if rel == "<=" else r)
        hi.append(np.inf if rel == ">=" else r)
    return cost, np.array(rows), np.array(lo), np.array(hi)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
