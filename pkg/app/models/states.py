"""
Parameter models for two-qubit edge states.

Pms is the three-parameter family

    rho(alpha, gamma, lam) = lam |alpha,gamma><alpha,gamma| + (1 - lam) |01><01|
    |alpha,gamma> = sqrt(alpha)|00> + sqrt(1 - alpha - gamma)|11> + sqrt(gamma)|01>

with the first ket slot on node A. gamma = 0 gives the purifiable
mixed states used throughout distillation and the strategies.
"""

from enum import Enum
from typing import List, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, model_validator


# Slack for alpha + gamma <= 1 after floating-point arithmetic
SUM_SLACK = 1e-12


class Pms(BaseModel):
    """Mixed edge state rho(alpha, gamma, lam)."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    alpha: float = Field(ge=0.0, le=1.0, description="Weight of |00> in the pure part")
    gamma: float = Field(0.0, ge=0.0, le=1.0, description="Weight of |01> in the pure part")
    lam: float = Field(
        ge=0.0,
        le=1.0,
        validation_alias=AliasChoices("lam", "lambda"),
        description="Weight of the pure part",
    )

    @model_validator(mode="after")
    def _check_simplex(self) -> "Pms":
        if self.alpha + self.gamma > 1.0 + SUM_SLACK:
            raise ValueError(
                f"alpha + gamma must not exceed 1 (got {self.alpha + self.gamma!r})"
            )
        return self

    @property
    def beta_weight(self) -> float:
        """Weight 1 - alpha - gamma of |11> in the pure part."""
        return max(0.0, 1.0 - self.alpha - self.gamma)

    @property
    def purifiable(self) -> bool:
        return self.gamma == 0.0

    @classmethod
    def purifiable_state(cls, alpha: float, lam: float) -> "Pms":
        """rho(alpha, lam) = rho(alpha, 0, lam)."""
        return cls(alpha=alpha, gamma=0.0, lam=lam)


class PureSchmidt(BaseModel):
    """Pure state sqrt(alpha)|00> + sqrt(1 - alpha)|11>."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0.0, le=1.0)

    @property
    def canonical(self) -> bool:
        return self.alpha >= 0.5

    @property
    def smaller_weight(self) -> float:
        return min(self.alpha, 1.0 - self.alpha)


class SwapLabel(str, Enum):
    """Bell outcomes; Psi = (|00> +- |11>)/sqrt2, Phi = (|01> +- |10>)/sqrt2."""

    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"


class SwapOutcome(BaseModel):
    """One Bell-measurement outcome of a mixed-state swap."""

    model_config = ConfigDict(frozen=True)

    label: SwapLabel
    probability: float = Field(ge=0.0, le=1.0)
    result: Optional[Pms] = None  # None marks an unusable branch

    @property
    def usable(self) -> bool:
        return self.result is not None


class PureSwapOutcome(BaseModel):
    """One outcome of swapping two pure states."""

    model_config = ConfigDict(frozen=True)

    label: SwapLabel
    probability: float = Field(ge=0.0, le=1.0)
    result: PureSchmidt


class PcmResult(BaseModel):
    """Outcome "11" of the pure state conversion measurement."""

    model_config = ConfigDict(frozen=True)

    success_prob: float = Field(ge=0.0, le=1.0)
    result: Optional[PureSchmidt] = None
    degenerate: bool = False


class PcmBranches(BaseModel):
    """All three outcome classes of the conversion measurement."""

    model_config = ConfigDict(frozen=True)

    success: float = Field(ge=0.0, le=1.0, description="Outcome 11, pure state")
    recycle: float = Field(ge=0.0, le=1.0, description="Outcome 00, new Pms")
    fail: float = Field(ge=0.0, le=1.0, description="Outcomes 01 and 10")
    pure: Optional[PureSchmidt] = None
    recycled: Optional[Pms] = None


class ChainResult(BaseModel):
    """Final A-B state after swapping along a path."""

    model_config = ConfigDict(frozen=True)

    kind: str  # "pure" or "pms"
    hops: int
    pms: Optional[Pms] = None
    # (probability, alpha) pairs of the final pure state, merged by alpha
    pure_outcomes: List[tuple[float, float]] = Field(default_factory=list)

    @property
    def singlet_probability(self) -> float:
        """Probability that the chain ends in a singlet without filtering."""
        if self.kind == "pms":
            return 0.0
        return sum(p for p, alpha in self.pure_outcomes if abs(alpha - 0.5) < 1e-12)
