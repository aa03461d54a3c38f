"""
Routing models: singlet graphs, messages, GHZ bookkeeping and traces.

A qubit is named by the pair (holder, neighbour): the half of the
singlet on edge {holder, neighbour} that sits at `holder`.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from common.utils.exceptions import ParameterRangeError


Qubit = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class SingletGraph:
    """Simple undirected graph of perfect singlets between nodes 0..n-1."""

    node_count: int
    edges: FrozenSet[Tuple[int, int]]
    source: int
    target: int
    _adjacency: Dict[int, Tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.node_count < 2:
            raise ParameterRangeError("A singlet graph needs at least two nodes")
        if self.source == self.target:
            raise ParameterRangeError(
                "Endpoints A and B must differ", details={"node": self.source}
            )
        for endpoint in (self.source, self.target):
            if not 0 <= endpoint < self.node_count:
                raise ParameterRangeError(
                    f"Endpoint {endpoint} is not a node", details={"node": endpoint}
                )

        normalized = set()
        adjacency: Dict[int, List[int]] = {u: [] for u in range(self.node_count)}
        for u, v in self.edges:
            if u == v:
                raise ParameterRangeError("Self-loops are not singlets", details={"node": u})
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ParameterRangeError(
                    f"Edge ({u}, {v}) leaves the node range", details={"edge": [u, v]}
                )
            edge = (min(u, v), max(u, v))
            if edge in normalized:
                continue
            normalized.add(edge)
            adjacency[u].append(v)
            adjacency[v].append(u)

        object.__setattr__(self, "edges", frozenset(normalized))
        object.__setattr__(
            self, "_adjacency", {u: tuple(sorted(vs)) for u, vs in adjacency.items()}
        )

    @classmethod
    def from_edges(
        cls, edges: Sequence[Tuple[int, int]], source: int, target: int,
        node_count: Optional[int] = None,
    ) -> "SingletGraph":
        """Build a graph, inferring the node count from the edges if needed."""
        if node_count is None:
            node_count = 1 + max([source, target] + [max(u, v) for u, v in edges])
        return cls(node_count=node_count, edges=frozenset(edges), source=source, target=target)

    def neighbors(self, node: int) -> Tuple[int, ...]:
        return self._adjacency[node]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_edges_from(self.edges)
        return graph


class MessageKind(str, Enum):
    BURN = "Burn"
    SWAP = "Swap"
    PHASE_INFO = "PhaseInfo"
    NO_PHASE_ERROR = "NoPhaseError"


@dataclass(frozen=True)
class Message:
    """
    One hop along a singlet edge, delivered in the following round.

    `payload` holds the Bell outcome (0..3) of a Swap, the parity of a
    PhaseInfo, or the join correction bit carried by a GHZ Burn.
    """

    kind: MessageKind
    sender: int
    receiver: int
    round: int
    payload: Optional[int] = None


class TraceKind(str, Enum):
    CNOT = "cnot"
    BELL_MEASURE = "bell_measure"
    MEASURE_Z = "measure_z"
    MEASURE_X = "measure_x"
    X = "x"
    Z = "z"


@dataclass(frozen=True)
class TraceOp:
    """
    Recorded local operation.

    For measurements `outcome` is the recorded result; a Bell
    measurement stores 2*m1 + m2 for the (phase, parity) bits.
    """

    kind: TraceKind
    qubits: Tuple[Qubit, ...]
    outcome: Optional[int] = None


@dataclass
class Trace:
    """Gate and measurement sequence plus the qubits holding the result."""

    ops: List[TraceOp] = field(default_factory=list)
    final_qubits: Tuple[Qubit, ...] = ()

    def record(self, kind: TraceKind, *qubits: Qubit, outcome: Optional[int] = None) -> None:
        self.ops.append(TraceOp(kind=kind, qubits=tuple(qubits), outcome=outcome))

    def qubits(self) -> List[Qubit]:
        """Every qubit touched by the trace or holding the result, sorted."""
        seen = set(self.final_qubits)
        for op in self.ops:
            seen.update(op.qubits)
        return sorted(seen)

    def to_dict(self) -> dict:
        return {
            "ops": [
                {"kind": op.kind.value, "qubits": [list(q) for q in op.qubits], "outcome": op.outcome}
                for op in self.ops
            ],
            "final_qubits": [list(q) for q in self.final_qubits],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Trace":
        ops = [
            TraceOp(
                kind=TraceKind(item["kind"]),
                qubits=tuple(tuple(q) for q in item["qubits"]),
                outcome=item.get("outcome"),
            )
            for item in data.get("ops", [])
        ]
        finals = tuple(tuple(q) for q in data.get("final_qubits", []))
        return cls(ops=ops, final_qubits=finals)


@dataclass
class GhzRecord:
    """
    Symbolic GHZ state grown from A.

    members maps each member qubit to its pending bit flip: the state is
    sum_b (-1)^(phase*b) |b xor flip_q>_q over members, up to normalization.
    """

    members: Dict[Qubit, int] = field(default_factory=dict)
    phase: int = 0
    parent_of: Dict[int, int] = field(default_factory=dict)

    def member_nodes(self) -> FrozenSet[int]:
        return frozenset(q[0] for q in self.members)

    def add(self, qubit: Qubit, flip: int) -> None:
        self.members[qubit] = flip & 1

    def remove(self, qubit: Qubit) -> None:
        del self.members[qubit]


class RouteReport(BaseModel):
    """Run report of one routing protocol instance."""

    model_config = ConfigDict(frozen=True)

    protocol: str
    success: bool
    # Round at which B joins the route; 2(N-1) on failure
    rounds: int = Field(ge=0)
    messages: int = Field(ge=0)
    path: Optional[List[int]] = None
    distillation_messages: int = Field(0, ge=0)
    # Round at which the Swap retrace or the last PhaseInfo reaches A
    completion_round: Optional[int] = Field(None, ge=0)

    @property
    def path_length(self) -> int:
        return len(self.path) - 1 if self.path else 0


@dataclass
class GhzOutcome:
    """Result of the GHZ protocol: report, final record and trace."""

    report: RouteReport
    record: Optional[GhzRecord]
    trace: Trace
    message_log: List[Message] = field(default_factory=list)
