"""
entperc domain models.

Parameter models are frozen pydantic models; the numeric containers of
the density-matrix oracle are frozen dataclasses around numpy arrays.
"""

from app.models.quantum import (
    DensityMatrix,
    KetState,
    PovmElementSet,
    PovmOutcome,
    RangeClass,
)
from app.models.states import (
    Pms,
    PureSchmidt,
    SwapLabel,
    SwapOutcome,
    PureSwapOutcome,
    PcmResult,
    PcmBranches,
    ChainResult,
)
from app.models.distillation import (
    Scheme,
    RecyclingState,
    BranchProbs,
    DssMeasurement,
    DssSimulation,
    MonteCarloEstimate,
    FeasibilityReport,
)
from app.models.lattice import (
    Geometry,
    Boundary,
    LatticeSpec,
    Lattice,
    BondConfig,
    ClusterStats,
    ThetaPoint,
    ThresholdEstimate,
)
from app.models.network import (
    Qubit,
    SingletGraph,
    MessageKind,
    Message,
    TraceKind,
    TraceOp,
    Trace,
    GhzRecord,
    GhzOutcome,
    RouteReport,
)
from app.models.strategy import (
    BondPair,
    StrategyReport,
    PureComparison,
    SquareReport,
    FccCheck,
    HierarchyKind,
    HierarchySpec,
)
from app.models.verification import SuiteReport

__all__ = [
    # Oracle containers
    "DensityMatrix",
    "KetState",
    "PovmElementSet",
    "PovmOutcome",
    "RangeClass",
    # Edge states
    "Pms",
    "PureSchmidt",
    "SwapLabel",
    "SwapOutcome",
    "PureSwapOutcome",
    "PcmResult",
    "PcmBranches",
    "ChainResult",
    # Distillation
    "Scheme",
    "RecyclingState",
    "BranchProbs",
    "DssMeasurement",
    "DssSimulation",
    "MonteCarloEstimate",
    "FeasibilityReport",
    # Lattices
    "Geometry",
    "Boundary",
    "LatticeSpec",
    "Lattice",
    "BondConfig",
    "ClusterStats",
    "ThetaPoint",
    "ThresholdEstimate",
    # Routing
    "Qubit",
    "SingletGraph",
    "MessageKind",
    "Message",
    "TraceKind",
    "TraceOp",
    "Trace",
    "GhzRecord",
    "GhzOutcome",
    "RouteReport",
    # Strategies
    "BondPair",
    "StrategyReport",
    "PureComparison",
    "SquareReport",
    "FccCheck",
    "HierarchyKind",
    "HierarchySpec",
    # Verification
    "SuiteReport",
]
