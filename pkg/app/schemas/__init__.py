"""
entperc configuration schemas.

Experiment configuration and per-command parameter models.
"""

from app.schemas.experiment import (
    Command,
    OutputFormat,
    expand_grid,
    VerifyParams,
    DistillParams,
    PercolateParams,
    ThresholdParams,
    RouteProtocol,
    RouteParams,
    StrategyParams,
    SquareParams,
    HierarchyParams,
    PARAMS_BY_COMMAND,
    ExperimentConfig,
    CommandResult,
)

__all__ = [
    "Command",
    "OutputFormat",
    "expand_grid",
    # Per-command parameters
    "VerifyParams",
    "DistillParams",
    "PercolateParams",
    "ThresholdParams",
    "RouteProtocol",
    "RouteParams",
    "StrategyParams",
    "SquareParams",
    "HierarchyParams",
    "PARAMS_BY_COMMAND",
    # Runs
    "ExperimentConfig",
    "CommandResult",
]
