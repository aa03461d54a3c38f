"""
Strategy models: two-edge bonds, comparison reports and hierarchies.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.states import Pms


class BondPair(BaseModel):
    """A bond made of the two edges rho(alpha, lam) and rho(beta, nu)."""

    model_config = ConfigDict(frozen=True)

    edge1: Pms
    edge2: Pms

    @model_validator(mode="after")
    def _check_purifiable(self) -> "BondPair":
        if self.edge1.gamma != 0.0 or self.edge2.gamma != 0.0:
            raise ValueError("bond edges must have gamma = 0")
        return self

    @classmethod
    def of(cls, alpha: float, beta: float, lam: float, nu: float) -> "BondPair":
        return cls(
            edge1=Pms.purifiable_state(alpha, lam),
            edge2=Pms.purifiable_state(beta, nu),
        )


class StrategyReport(BaseModel):
    """Success probabilities of the swapping strategies on one bond pair."""

    model_config = ConfigDict(frozen=True)

    p_cep: float = Field(ge=0.0, le=1.0)
    p_d: float = Field(ge=0.0, le=1.0)
    p_d_star: float = Field(ge=0.0, le=1.0)
    p_h: float = Field(ge=0.0, le=1.0)
    context: str = ""


class PureComparison(BaseModel):
    """Two pure edges: classical, direct and hybrid swapping."""

    model_config = ConfigDict(frozen=True)

    p_cep: float = Field(ge=0.0, le=1.0)
    p_direct: float = Field(ge=0.0, le=1.0)
    p_hybrid: float = Field(ge=0.0, le=1.0)


class SquareReport(BaseModel):
    """Square protocol with XZ-swapping against doubled classical percolation."""

    model_config = ConfigDict(frozen=True)

    p_sq: float = Field(ge=0.0, le=1.0)
    p_cep_tilde: float = Field(ge=0.0, le=1.0)
    p_c: float = Field(ge=0.0, le=1.0)
    alpha_hat: Optional[float] = None
    alpha_tilde: Optional[float] = None


class FccCheck(BaseModel):
    """Hybrid vs classical percolation on the split-bond FCC network."""

    model_config = ConfigDict(frozen=True)

    p_hybrid: float
    p_cep: float
    threshold: float
    feasible_hybrid: bool
    feasible_cep: bool


class HierarchyKind(str, Enum):
    DIAMOND = "diamond"
    TREE = "tree"


# Iteration caps for the closed-form recursion and the Monte Carlo network
ANALYTIC_MAX_ITERATION = 8
SIMULATION_MAX_ITERATION = 4


class HierarchySpec(BaseModel):
    """A diamond or tree network at a given iteration."""

    model_config = ConfigDict(frozen=True)

    kind: HierarchyKind
    iteration: int = Field(ge=1, le=ANALYTIC_MAX_ITERATION)
    bond: BondPair
