"""
entperc services.

Simulation logic on top of the common/ infrastructure:

- quantum_core: density-matrix oracle
- protocols: closed-form swapping, PCM and filtering
- distillation: recycling and DSS schemes
- percolation: lattices, clusters and thresholds
- routing: controller, burning and GHZ protocols
- strategies: bond strategies and hierarchies
- verification: closed forms against the oracle
"""

from app.services import (
    distillation,
    percolation,
    protocols,
    quantum_core,
    routing,
    strategies,
    verification,
)

__all__ = [
    "quantum_core",
    "protocols",
    "distillation",
    "percolation",
    "routing",
    "strategies",
    "verification",
]
