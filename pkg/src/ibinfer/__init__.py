"""Anytime belief-network inference by enumerating independence-based
(IB) assignments, with a best-first search backend and a 0-1 integer
programming backend."""

from .assignments import (
    EMPTY,
    Assignment,
    compatible,
    format_assignment,
    is_ib,
    log_probability,
    parse_assignment,
    probability,
    properly_supported,
    subsumed_by,
    union,
)
from .errors import EvidenceError, InfeasibleError, NetworkError, ResourceLimitError
from .generator import GenSpec, generate
from .hypercubes import Hypercube, HypercubeIndex, build_index, extract_hypercubes
from .mass import AssignmentSet, MassEstimate, PosteriorEstimate, incremental_add, posterior, set_mass
from .network import (
    BeliefNetwork,
    ancestors,
    d_separated,
    dumps,
    load_network,
    loads,
    parse_assignment_text,
    prune_for_query,
    supported_set,
    topological_order,
)
from .session import EnumerationSession, Step, start_session

__all__ = [
    "EMPTY",
    "Assignment",
    "AssignmentSet",
    "BeliefNetwork",
    "EnumerationSession",
    "EvidenceError",
    "GenSpec",
    "Hypercube",
    "HypercubeIndex",
    "InfeasibleError",
    "MassEstimate",
    "NetworkError",
    "PosteriorEstimate",
    "ResourceLimitError",
    "Step",
    "ancestors",
    "build_index",
    "compatible",
    "d_separated",
    "dumps",
    "extract_hypercubes",
    "format_assignment",
    "generate",
    "incremental_add",
    "is_ib",
    "load_network",
    "loads",
    "log_probability",
    "parse_assignment",
    "parse_assignment_text",
    "posterior",
    "probability",
    "properly_supported",
    "prune_for_query",
    "set_mass",
    "start_session",
    "subsumed_by",
    "supported_set",
    "topological_order",
    "union",
]
