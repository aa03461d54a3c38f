"""
Experiment configuration schemas.

An ExperimentConfig names a subcommand, its parameters, the master seed
and the output target. It comes from command-line flags or from one
JSON document; unknown keys are rejected at both levels.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.distillation import Scheme
from app.models.lattice import Boundary, Geometry
from app.models.strategy import ANALYTIC_MAX_ITERATION, HierarchyKind
from common.utils.exceptions import ParameterRangeError


SEED_MAX = 2**64 - 1


class Command(str, Enum):
    VERIFY = "verify"
    DISTILL = "distill"
    PERCOLATE = "percolate"
    THRESHOLD = "threshold"
    ROUTE = "route"
    STRATEGY = "strategy"
    SQUARE = "square"
    HIERARCHY = "hierarchy"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def expand_grid(text: str) -> List[float]:
    """
    Expand "start:stop:step" into an inclusive grid.

    Raises:
        ParameterRangeError: If the text is not a valid range
    """
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise ParameterRangeError(
            f"Grid {text!r} is not start:stop:step", details={"grid": text}
        )
    if step <= 0 or stop < start:
        raise ParameterRangeError(
            f"Grid {text!r} needs step > 0 and stop >= start", details={"grid": text}
        )
    count = int(round((stop - start) / step))
    return [round(start + index * step, 12) for index in range(count + 1)]


class Probabilities(BaseModel):
    """Base for parameter models holding probability lists."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @field_validator("alpha", "beta", "lam", "nu", "p", mode="after", check_fields=False)
    @classmethod
    def _in_unit_interval(cls, values):
        items = values if isinstance(values, list) else [values]
        for value in items:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"probability {value} outside [0, 1]")
        return values


# =============================================================================
# Per-command parameters
# =============================================================================


class VerifyParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: List[str] = Field(default_factory=lambda: ["all"])
    draws: int = Field(1000, ge=1)


class DistillParams(Probabilities):
    scheme: Scheme = Scheme.RECYCLING
    n: List[int] = Field(default_factory=lambda: [2, 4, 6, 8])
    alpha: List[float] = Field(default_factory=lambda: [0.5])
    lam: List[float] = Field(default_factory=lambda: [1.0], alias="lambda")
    trials: int = Field(4096, ge=1)

    @field_validator("n")
    @classmethod
    def _non_negative(cls, values: List[int]) -> List[int]:
        if any(n < 0 for n in values):
            raise ValueError("n must be non-negative")
        return values


class LatticeParams(Probabilities):
    geometry: Geometry = Geometry.SQUARE
    size: int = Field(64, ge=2)
    boundary: Boundary = Boundary.OPEN


class PercolateParams(LatticeParams):
    p: List[float] = Field(default_factory=lambda: [0.5])
    trials: int = Field(400, ge=2)
    cep: bool = False
    n: List[int] = Field(default_factory=lambda: [2, 3])
    alpha: List[float] = Field(default_factory=lambda: [0.5])
    lam: List[float] = Field(default_factory=lambda: [1.0], alias="lambda")
    scheme: Scheme = Scheme.AUTO


class ThresholdParams(LatticeParams):
    trials: int = Field(400, ge=100)
    resolution: float = Field(0.005, gt=0.0, le=0.5)
    p_min: float = Field(0.0, ge=0.0, le=1.0)
    p_max: float = Field(1.0, ge=0.0, le=1.0)
    confidence: float = Field(0.95, gt=0.0, lt=1.0)


class RouteProtocol(str, Enum):
    CONTROLLER = "controller"
    BURNING = "burning"
    GHZ = "ghz"
    ALL = "all"


class RouteParams(LatticeParams):
    edges: Optional[str] = None
    source: Optional[int] = Field(None, ge=0)
    target: Optional[int] = Field(None, ge=0)
    size: int = Field(8, ge=2)
    p: float = 0.7
    samples: int = Field(1, ge=1)
    protocol: RouteProtocol = RouteProtocol.ALL
    keep: List[int] = Field(default_factory=list)
    fuse_distillation: bool = False
    trace: Optional[str] = None
    write_edges: Optional[str] = None


class StrategyParams(Probabilities):
    alpha: List[float] = Field(default_factory=lambda: [0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    beta: List[float] = Field(default_factory=lambda: [0.5])
    lam: float = Field(1.0, alias="lambda")
    nu: float = 1.0
    pure: bool = False


class SquareParams(Probabilities):
    alpha: List[float] = Field(default_factory=lambda: [0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    beta: float = 0.5
    lam: float = Field(0.98, alias="lambda")
    nu: float = 0.98


class HierarchyParams(Probabilities):
    kind: List[HierarchyKind] = Field(
        default_factory=lambda: [HierarchyKind.DIAMOND, HierarchyKind.TREE]
    )
    iteration: List[int] = Field(default_factory=lambda: [1, 2, 3])
    alpha: List[float] = Field(default_factory=lambda: [0.5, 0.6, 0.7, 0.8, 0.9])
    beta: float = 0.5
    lam: float = Field(0.9, alias="lambda")
    nu: float = 0.9
    trials: int = Field(2000, ge=2)
    random_order: bool = False
    simulate: bool = True

    @field_validator("iteration")
    @classmethod
    def _iteration_range(cls, values: List[int]) -> List[int]:
        if any(not 1 <= i <= ANALYTIC_MAX_ITERATION for i in values):
            raise ValueError(f"iteration must lie in 1..{ANALYTIC_MAX_ITERATION}")
        return values


PARAMS_BY_COMMAND: Dict[Command, Type[BaseModel]] = {
    Command.VERIFY: VerifyParams,
    Command.DISTILL: DistillParams,
    Command.PERCOLATE: PercolateParams,
    Command.THRESHOLD: ThresholdParams,
    Command.ROUTE: RouteParams,
    Command.STRATEGY: StrategyParams,
    Command.SQUARE: SquareParams,
    Command.HIERARCHY: HierarchyParams,
}


# =============================================================================
# Experiment
# =============================================================================


class ExperimentConfig(BaseModel):
    """One run of one subcommand."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(0, ge=0, le=SEED_MAX)
    output_path: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    deterministic: bool = False
    workers: Optional[int] = Field(None, ge=1)

    def typed_params(self) -> BaseModel:
        """Validate `params` against the command's parameter model."""
        return PARAMS_BY_COMMAND[self.command].model_validate(self.params)


class CommandResult(BaseModel):
    """Rows produced by a command, ready for write_table."""

    rows: List[Dict[str, Any]]
    columns: List[str]
    extra: Dict[str, Any] = Field(default_factory=dict)
    acceptance_failure: Optional[str] = None
