"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 infeasible or
zero-probability evidence, 4 resource guard or timeout.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, oracle
from .assignments import Assignment, format_assignment
from .errors import EvidenceError, InfeasibleError, NetworkError, ResourceLimitError
from .generator import GenSpec, generate
from .hypercubes import build_index
from .mass import DEFAULT_TRUNC
from .network import dumps, load_network, parse_assignment_text

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _trunc(text):
    k = int(text)
    if k < 0:
        raise argparse.ArgumentTypeError("truncation order must be >= 0 (0 means exact)")
    return None if k == 0 else k


def _nonneg_int(text):
    k = int(text)
    if k < 0:
        raise argparse.ArgumentTypeError("expected a non-negative integer")
    return k


def _seed(text):
    s = int(text)
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return s


def _common_query(p):
    p.add_argument("--net", required=True, help="network JSON file")
    p.add_argument("--evidence", default="", help='evidence as "NAME=value,..."')
    p.add_argument("--query", required=True, help="query node name")
    p.add_argument("--backend", choices=("search", "ilp"), default="search")
    p.add_argument("--trunc", type=_trunc, default=DEFAULT_TRUNC, help="inclusion-exclusion order, 0 for exact")
    p.add_argument("--timeout", type=float, default=None, help="seconds before giving up")
    p.add_argument("--out", default=None, help="write output here instead of stdout")


def _gen_flags(p, nodes, max_parents, csi):
    p.add_argument("--nodes", type=int, default=nodes)
    p.add_argument("--max-parents", type=int, default=max_parents)
    p.add_argument("--domain-min", type=int, default=2)
    p.add_argument("--domain-max", type=int, default=4)
    p.add_argument("--csi", type=float, default=csi, help="region-merging strength in [0, 1]")
    p.add_argument("--skew", type=float, default=None)
    p.add_argument("--seed", type=_seed, default=0)


def _spec_from(args) -> GenSpec:
    lo, hi = args.domain_min, args.domain_max
    defaults = GenSpec()
    weights = defaults.domain_weights if (lo, hi) == defaults.domain_size_range else None
    return GenSpec(
        node_count=args.nodes,
        max_parents=args.max_parents,
        domain_size_range=(lo, hi),
        domain_weights=weights,
        csi_fraction=args.csi,
        skew=args.skew,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="ibinfer", description="Anytime inference by IB assignment enumeration.")
    sub = top.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random network")
    _gen_flags(p, 10, 3, 0.6)
    p.add_argument("--out", default=None)

    p = sub.add_parser("show", help="summarise a network and its hypercubes")
    p.add_argument("--net", required=True)
    p.add_argument("--cubes", action="store_true", help="list every maximal hypercube")
    p.add_argument("--out", default=None)

    p = sub.add_parser("enumerate", help="stream IB assignments as CSV")
    _common_query(p)
    p.add_argument("--top", type=_nonneg_int, default=25)
    p.add_argument("--timing", action="store_true", help="add an elapsed-seconds column")

    p = sub.add_parser("marginal", help="anytime posterior estimate of the query")
    _common_query(p)
    p.add_argument("--max-count", type=_nonneg_int, default=None)
    p.add_argument("--max-mass", type=float, default=None)
    p.add_argument("--max-seconds", type=float, default=None)

    p = sub.add_parser("exact", help="exact posterior from the full joint table")
    p.add_argument("--net", required=True)
    p.add_argument("--evidence", default="")
    p.add_argument("--query", required=True)
    p.add_argument("--list-ib", action="store_true", help="also list every IB assignment")
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench-mass", help="mass accumulation of IB versus complete assignments")
    _gen_flags(p, 10, 3, 0.6)
    p.add_argument("--networks", type=_nonneg_int, default=50)
    p.add_argument("--top", type=_nonneg_int, default=25)
    p.add_argument("--backend", choices=("search", "ilp"), default="search")
    p.add_argument("--timeout", type=float, default=None, help="seconds per network")
    p.add_argument("--per-network", default=None, help="also write per-network curves here")
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench-scale", help="time to first and to N assignments on large networks")
    _gen_flags(p, 200, 3, 0.7)
    p.add_argument("--networks", type=_nonneg_int, default=1)
    p.add_argument("--top", type=_nonneg_int, default=1)
    p.add_argument("--evidence-sinks", type=_nonneg_int, default=20)
    p.add_argument("--backend", choices=("search", "ilp"), default="ilp")
    p.add_argument("--timeout", type=float, default=None, help="seconds per network")
    p.add_argument("--out", default=None)
    return top


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load_query(args):
    net = load_network(args.net)
    evidence = parse_assignment_text(net, args.evidence)
    query = net.index_of(args.query)
    if query in evidence:
        raise EvidenceError(f"query node {args.query!r} is assigned by the evidence")
    return net, evidence, query


def cmd_gen(args):
    net = generate(_spec_from(args))
    _emit(dumps(net) + "\n", args.out)


def cmd_show(args):
    net = load_network(args.net)
    index = build_index(net)
    lines = [f"nodes\t{len(net)}", f"states\t{net.state_count()}", f"hypercubes\t{len(index)}"]
    for v in net.topo_order:
        parents = ",".join(net.names[p] for p in net.parents[v])
        lines.append(f"{net.names[v]}\t{{{','.join(net.domains[v])}}}\tparents [{parents}]\tcubes {len(index.by_node[v])}")
    text = "\n".join(lines) + "\n"
    if args.cubes:
        text += index.dump() + "\n"
    _emit(text, args.out)


def cmd_enumerate(args):
    net, evidence, query = _load_query(args)
    report = harness.enumerate_report(net, evidence, query, args.top, args.backend, args.trunc, args.timeout)
    _emit(report.to_csv(timing=args.timing), args.out)


def cmd_marginal(args):
    net, evidence, query = _load_query(args)
    report = harness.marginal_report(
        net,
        evidence,
        query,
        backend=args.backend,
        trunc=args.trunc,
        max_count=args.max_count,
        max_mass=args.max_mass,
        max_seconds=args.max_seconds,
        timeout=args.timeout,
    )
    _emit(report.to_text(), args.out)


def cmd_exact(args):
    net, evidence, query = _load_query(args)
    post = oracle.exact_posterior(net, evidence, query)
    p_e = oracle.exact_event(net, Assignment(evidence))
    lines = [f"{lab}\t{harness.fmt(p)}" for lab, p in zip(net.domains[query], post)]
    lines.append(f"evidence\t{harness.fmt(p_e)}")
    if args.list_ib:
        prep = harness.prepare(net, evidence, query)
        for a, p in oracle.all_ib_assignments(prep.net, prep.index, prep.evidence, prep.query):
            lines.append(f"ib\t{format_assignment(prep.net, a)}\t{harness.fmt(p)}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_bench_mass(args):
    curves = harness.mass_curves(_spec_from(args), args.networks, args.top, args.backend, args.seed, args.timeout)
    if args.per_network:
        _emit(curves.per_network_csv(), args.per_network)
    _emit(curves.summary_csv(), args.out)


def cmd_bench_scale(args):
    records = harness.scale_run(
        _spec_from(args), args.networks, args.top, args.backend, args.evidence_sinks, args.seed, args.timeout
    )
    _emit(harness.scale_csv(records), args.out)


COMMANDS = {
    "gen": cmd_gen,
    "show": cmd_show,
    "enumerate": cmd_enumerate,
    "marginal": cmd_marginal,
    "exact": cmd_exact,
    "bench-mass": cmd_bench_mass,
    "bench-scale": cmd_bench_scale,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        COMMANDS[args.verb](args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NetworkError, EvidenceError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
