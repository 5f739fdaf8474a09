"""Hamilton cycles in the union of a regular graph and a random cycle cover.

Pipeline: sample or load a d-regular graph, overlay a uniformly random
2-factor through a hidden relabeling, then grow and close a Hamilton cycle
with a rotation search that only ever inspects the relabeling lazily.
"""

from .graphs import (
    CycleCover,
    Graph,
    HamCycle,
    NearTwoFactor,
    cycle_decomposition,
    delete_edge,
    verify_ham_cycle,
)

__all__ = [
    "Graph",
    "CycleCover",
    "NearTwoFactor",
    "HamCycle",
    "cycle_decomposition",
    "delete_edge",
    "verify_ham_cycle",
]

__version__ = "0.1.0"
