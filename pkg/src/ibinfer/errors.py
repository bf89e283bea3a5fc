"""Exception types shared across the package."""


class NetworkError(ValueError):
    """Malformed or invalid belief network (parse error, cycle, bad table)."""


class EvidenceError(ValueError):
    """Evidence or query refers to unknown nodes/values or clashes."""


class InfeasibleError(RuntimeError):
    """No solution exists: contradictory evidence or exhausted cuts."""


class ResourceLimitError(RuntimeError):
    """A size guard or time budget was exceeded."""
