"""
entperc application code.

This package contains the singlet-distribution simulator:
- models: Edge-state parameters, oracle containers, lattices, routing types
- schemas: Experiment configuration and per-command parameters
- services: Oracle, protocols, distillation, percolation, routing, strategies
- routers: One CLI subcommand per module
- config: Application settings

Uses generic infrastructure from the common/ package.
"""

from app.config import settings

__all__ = ["settings"]
