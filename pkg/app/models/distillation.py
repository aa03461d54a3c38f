"""
Distillation models: multi-copy measurement and recycling bookkeeping.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.models.quantum import PovmElementSet


class Scheme(str, Enum):
    """Bond distillation scheme."""

    RECYCLING = "recycling"
    DSS = "dss"
    THREE = "three"
    AUTO = "auto"


class RecyclingState(BaseModel):
    """Pms parameters after `level` recycling rounds."""

    model_config = ConfigDict(frozen=True)

    alpha_k: float = Field(ge=0.0, le=1.0)
    lambda_k: float = Field(ge=0.0, le=1.0)
    level: int = Field(0, ge=0)


class BranchProbs(BaseModel):
    """Outcome classes of one pairwise attempt."""

    model_config = ConfigDict(frozen=True)

    c: float = Field(description="A new Pms is left")
    f: float = Field(description="Complete failure")
    s: float = Field(description="Singlet")


@dataclass(frozen=True, eq=False)
class DssMeasurement:
    """
    Two-stage local measurement on n copies.

    `pairs` maps every successful A-side label to its (k, a, b); the
    failure projectors carry no entry. `conditional_povms_b` maps the
    same labels to the B-side measurement, whose success labels are
    "d<d>" and whose failure label is "fail".
    """

    n: int
    povm_a: PovmElementSet
    conditional_povms_b: Dict[str, PovmElementSet]
    pairs: Dict[str, Tuple[int, int, int]] = field(default_factory=dict)


class DssSimulation(BaseModel):
    """Result of simulating the multi-copy measurement in the oracle."""

    model_config = ConfigDict(frozen=True)

    n: int
    shots: int
    successes: int
    frequency: float
    stderr: float
    exact_probability: float = Field(description="Total success weight over branches")
    min_fidelity: Optional[float] = Field(
        None, description="Smallest singlet fidelity over success branches"
    )


class MonteCarloEstimate(BaseModel):
    """Mean of a per-trial quantity with its standard error."""

    model_config = ConfigDict(frozen=True)

    p_hat: float
    stderr: float
    trials: int


class FeasibilityReport(BaseModel):
    """Comparison of a bond SCP with a percolation threshold."""

    model_config = ConfigDict(frozen=True)

    scp: float
    threshold: float
    feasible: bool
    scheme: Scheme
    ceiling: Optional[float] = Field(
        None, description="Upper bound of the SCP for n=2 (1/2) and n=3 (3/4)"
    )
