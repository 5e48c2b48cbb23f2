"""Memory-budgeted hybrid edge partitioner.

The heavy lifting lives in the compiled extension; this package re-exports
its operations: partition edge-list files or in-memory edge lists, plan a
degree threshold for a byte budget, validate and measure assignments, and
generate corpus graphs.
"""

from ._hep import (
    __version__,
    generate,
    partition,
    partition_edges,
    plan_tau,
    stats,
    validate,
    validate_records,
)

__all__ = [
    "__version__",
    "generate",
    "partition",
    "partition_edges",
    "plan_tau",
    "stats",
    "validate",
    "validate_records",
]
