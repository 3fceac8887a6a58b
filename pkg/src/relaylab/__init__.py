"""relaylab: a desk-scale laboratory for miner-core relay topologies.

Generates Bitcoin-like peer graphs, measures their centrality,
spectral, and structural properties, floods transactions through a
deterministic discrete-event simulator, and runs the exclusion /
robustness experiment suite. Ships as a core library, a FastAPI
service wrapping it, and a thin-client CLI.
"""

__version__ = "0.1.0"

from .graphcore import (  # noqa: F401
    FULL,
    MINER,
    AdjacencyMatrix,
    DirectedGraph,
    NodeAttributes,
    NodeClass,
)
