"""Watch a posterior estimate tighten as IB assignments arrive.

Run from the repository root:  python3 demos/anytime_posterior.py
"""

from pathlib import Path

from ibinfer import build_index, format_assignment, load_network, start_session
from ibinfer.oracle import exact_posterior

net = load_network(Path(__file__).with_name("net3.json"))
index = build_index(net)
A, C = net.index_of("A"), net.index_of("C")

print("maximal hypercubes:")
print(index.dump())
print()

session = start_session(net, index, {C: 1}, A, backend="search")
while (item := session.next_ib()) is not None:
    a, p = item
    est = session.marginal_estimate()
    print(f"{format_assignment(net, a):12s} p={p:.4f}  P(A=1|C=1) ~ {est.value[1]:.6f}  in [{est.lower[1]:.4f}, {est.upper[1]:.4f}]")

print(f"exact: {exact_posterior(net, {C: 1}, A)[1]:.6f}")
