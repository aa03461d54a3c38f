"""
Lattice models for bond percolation.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Geometry(str, Enum):
    """Regular network geometries."""

    SQUARE = "square"
    TRIANGULAR = "triangular"
    HONEYCOMB = "honeycomb"
    SIMPLE_CUBIC = "simple_cubic"
    FCC = "fcc"


class Boundary(str, Enum):
    """Boundary handling; periodic_transverse wraps every non-spanning axis."""

    OPEN = "open"
    PERIODIC_TRANSVERSE = "periodic_transverse"


class LatticeSpec(BaseModel):
    """Geometry, linear size and boundary of a lattice."""

    model_config = ConfigDict(frozen=True)

    geometry: Geometry
    linear_size: int = Field(ge=2)
    boundary: Boundary = Boundary.OPEN


@dataclass(frozen=True, eq=False)
class Lattice:
    """
    Node count, bond endpoints and the two spanning faces.

    Spanning is measured along axis 0; `left` and `right` are the node
    indices on its first and last layer.
    """

    spec: LatticeSpec
    node_count: int
    bonds: np.ndarray  # shape (bond_count, 2), int64
    left: np.ndarray
    right: np.ndarray

    @property
    def bond_count(self) -> int:
        return int(self.bonds.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.bonds.reshape(-1), minlength=self.node_count)


@dataclass(frozen=True, eq=False)
class BondConfig:
    """Open/closed state of every bond for one sample."""

    lattice: Lattice
    open_bonds: np.ndarray  # bool, one entry per bond
    p: float

    @property
    def spec(self) -> LatticeSpec:
        return self.lattice.spec


class ClusterStats(BaseModel):
    """Largest-cluster statistics of one sample."""

    model_config = ConfigDict(frozen=True)

    largest_cluster_size: int = Field(ge=1)
    spanning: bool
    theta_hat: float = Field(ge=0.0, le=1.0)


class ThetaPoint(BaseModel):
    """Percolation probability estimate at one p."""

    model_config = ConfigDict(frozen=True)

    p: float
    spanning_freq: float
    theta_hat: float
    stderr: float


class ThresholdEstimate(BaseModel):
    """Crossing point of the spanning frequency with 1/2."""

    model_config = ConfigDict(frozen=True)

    p_hat: float
    ci_low: float
    ci_high: float
    converged: bool
    trials: int
