"""
Verification models: outcome of one formula-vs-oracle suite.
"""

from pydantic import BaseModel, ConfigDict, Field


class SuiteReport(BaseModel):
    """Largest disagreement found by a suite over its random draws."""

    model_config = ConfigDict(frozen=True)

    suite: str
    draws: int = Field(ge=1)
    max_error: float = Field(ge=0.0)
    tolerance: float = Field(gt=0.0)
    passed: bool
