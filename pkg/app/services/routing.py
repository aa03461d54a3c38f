"""
Local processing over a graph of perfect singlets.

Three strategies connect A and B once every bond has been distilled:

- controller: a central breadth-first search over the whole graph.
- burning: a distributed breadth-first search in synchronous rounds,
  followed by entanglement swapping back along the recorded route.
- GHZ: a GHZ state grows along the burning tree; nodes outside `keep`
  leave it by X measurement and A undoes the collected phase.

Quantum operations are recorded in a Trace that can be replayed in the
density-matrix oracle on small graphs.

Example:
    from app.models.network import SingletGraph
    from app.services import routing

    graph = SingletGraph.from_edges([(0, 1), (1, 2)], source=0, target=2)
    print(routing.burning_route(graph))
    outcome = routing.ghz_protocol(graph, seed=3)
    state = routing.replay_trace_in_oracle(outcome.trace, graph)
"""

import json
import logging
from collections import deque
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from app.config import settings
from app.models.network import (
    GhzOutcome,
    GhzRecord,
    Message,
    MessageKind,
    Qubit,
    RouteReport,
    SingletGraph,
    Trace,
    TraceKind,
)
from app.models.quantum import DensityMatrix
from app.models.states import ChainResult, Pms, PureSchmidt, SwapLabel
from app.services import protocols
from app.services import quantum_core as qc
from common.utils.exceptions import (
    BrokenPathError,
    InconsistentTraceError,
    OutputPathError,
    ParameterRangeError,
    ResourceCapError,
)
from common.utils.streams import stream_rng


logger = logging.getLogger(__name__)

EdgeState = Union[Pms, PureSchmidt]


def timeout_round(graph: SingletGraph) -> int:
    """Round 2(N-1) at which A and B conclude they are disconnected."""
    return 2 * (graph.node_count - 1)


def _path_from_parents(parents: Dict[int, Optional[int]], target: int) -> List[int]:
    path = [target]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path[::-1]


# =============================================================================
# Controller
# =============================================================================


def controller_path(graph: SingletGraph) -> Optional[List[int]]:
    """
    Shortest A-B path by hop count, or None when disconnected.

    Neighbours are scanned in increasing index order, so ties go to the
    lowest-index predecessor.
    """
    parents: Dict[int, Optional[int]] = {graph.source: None}
    queue = deque([graph.source])
    while queue:
        node = queue.popleft()
        if node == graph.target:
            return _path_from_parents(parents, graph.target)
        for neighbour in graph.neighbors(node):
            if neighbour not in parents:
                parents[neighbour] = node
                queue.append(neighbour)
    return None


# =============================================================================
# Burning
# =============================================================================


def burning_route(
    graph: SingletGraph,
    fuse_distillation: bool = False,
    bond_count: Optional[int] = None,
) -> RouteReport:
    """
    Distributed breadth-first search in synchronous rounds.

    A burns at round 0 and signals every neighbour. A node burns when it
    first hears a signal, keeps the lowest-index sender of that round as
    its predecessor and signals every other neighbour; later signals are
    ignored. When B burns at round d a Swap message retraces the route,
    reaching A at round 2d. `rounds` reports d, which is at most N-1 and
    so stays below the failure deadline; the retrace arrival 2d is
    `completion_round`. If B has not burned by round 2(N-1) the run is
    declared failed at that round.

    Args:
        graph: Singlet graph with endpoints
        fuse_distillation: Carry PCM outcomes inside the Burn messages
        bond_count: Bonds whose distillation outcomes are exchanged;
            defaults to the singlet edge count

    Returns:
        RouteReport; `messages` counts Burn and Swap messages
    """
    limit = timeout_round(graph)
    parents: Dict[int, Optional[int]] = {graph.source: None}
    outbox: List[Tuple[int, int]] = [(graph.source, w) for w in graph.neighbors(graph.source)]
    messages = len(outbox)
    reached: Optional[int] = None
    finish: Optional[int] = None
    path: Optional[List[int]] = None

    round_ = 0
    while True:
        round_ += 1
        senders: Dict[int, List[int]] = {}
        for sender, receiver in outbox:
            senders.setdefault(receiver, []).append(sender)
        outbox = []

        for node in sorted(w for w in senders if w not in parents):
            parents[node] = min(senders[node])
            logger.debug("Round %d: node %d burns from %d", round_, node, parents[node])
            if node == graph.target and finish is None:
                path = _path_from_parents(parents, node)
                reached = round_
                finish = 2 * round_
            if finish is None or round_ < finish:
                burns = [(node, w) for w in graph.neighbors(node) if w != parents[node]]
                outbox.extend(burns)
                messages += len(burns)

        if finish is not None and round_ >= finish:
            break
        if finish is None and round_ >= limit:
            break

    success = path is not None
    if success:
        messages += len(path) - 1
    distillation_messages = 0 if fuse_distillation else 2 * (
        len(graph.edges) if bond_count is None else bond_count
    )
    report = RouteReport(
        protocol="burning",
        success=success,
        rounds=reached if success else limit,
        messages=messages,
        path=path,
        distillation_messages=distillation_messages,
        completion_round=finish,
    )
    logger.debug("Burning: success=%s rounds=%d messages=%d", success, report.rounds, messages)
    return report


# =============================================================================
# Swapping along a path
# =============================================================================


def _check_path(path: Sequence[int], graph: Optional[SingletGraph]) -> List[int]:
    path = [int(node) for node in path]
    if len(path) < 2 or path[0] == path[-1]:
        raise BrokenPathError("A swap chain needs two distinct endpoints", details={"path": path})
    if graph is not None:
        for u, v in zip(path, path[1:]):
            if not graph.has_edge(u, v):
                raise BrokenPathError(
                    f"No singlet between {u} and {v}", details={"path": path}
                )
    return path


def swap_chain(
    path: Sequence[int],
    states: Optional[Sequence[EdgeState]] = None,
    graph: Optional[SingletGraph] = None,
) -> ChainResult:
    """
    Swap from A to B along a path.

    Args:
        path: Node sequence A, ..., B
        states: One edge state per hop; perfect singlets when omitted.
            Pure edges are swapped with every outcome kept; purifiable
            mixed edges use special swapping.
        graph: When given, every hop must be a singlet edge of it

    Returns:
        ChainResult with the outcome distribution (pure) or the final Pms

    Raises:
        BrokenPathError: For an empty path or a missing hop
        ParameterRangeError: If the states do not match the hops
    """
    path = _check_path(path, graph)
    hops = len(path) - 1
    if states is None:
        states = [PureSchmidt(alpha=0.5)] * hops
    states = list(states)
    if len(states) != hops:
        raise ParameterRangeError(
            f"Expected {hops} edge states, got {len(states)}", details={"path": path}
        )

    if all(isinstance(state, PureSchmidt) for state in states):
        distribution: Dict[float, float] = {states[0].alpha: 1.0}
        for state in states[1:]:
            merged: Dict[float, float] = {}
            for alpha, probability in distribution.items():
                for outcome in protocols.swap_pure(PureSchmidt(alpha=alpha), state):
                    key = round(outcome.result.alpha, 12)
                    merged[key] = merged.get(key, 0.0) + probability * outcome.probability
            distribution = merged
        return ChainResult(
            kind="pure",
            hops=hops,
            pure_outcomes=sorted((p, alpha) for alpha, p in distribution.items()),
        )

    if all(isinstance(state, Pms) for state in states):
        current = states[0]
        for state in states[1:]:
            current = protocols.swap_pms_special(current, state)
        return ChainResult(kind="pms", hops=hops, pms=current)

    raise ParameterRangeError("Edge states must be all pure or all mixed")


def swap_chain_trace(
    path: Sequence[int], seed: int = 0, graph: Optional[SingletGraph] = None
) -> Trace:
    """
    Gate-level record of swapping perfect singlets along a path.

    Each intermediate node Bell-measures its two qubits; the next node
    applies X^m2 then Z^m1 to its incoming qubit.
    """
    path = _check_path(path, graph)
    rng = stream_rng(seed, "routing.swap", len(path))
    trace = Trace()
    for previous, node, following in zip(path, path[1:], path[2:]):
        outcome = int(rng.integers(4))
        incoming = (following, node)
        trace.record(TraceKind.BELL_MEASURE, (node, previous), (node, following), outcome=outcome)
        if outcome & 1:
            trace.record(TraceKind.X, incoming)
        if outcome >> 1:
            trace.record(TraceKind.Z, incoming)
    trace.final_qubits = ((path[0], path[1]), (path[-1], path[-2]))
    return trace


# =============================================================================
# GHZ protocol
# =============================================================================


class _GhzRun:
    """Round-by-round state of one GHZ protocol instance."""

    def __init__(self, graph: SingletGraph, keep: frozenset, rng: np.random.Generator):
        self.graph = graph
        self.keep = keep
        self.rng = rng
        self.record = GhzRecord()
        self.trace = Trace()
        self.log: List[Message] = []
        self.ghz_qubit: Dict[int, Qubit] = {}
        self.pending: Dict[int, Set[int]] = {}
        self.parity: Dict[int, int] = {}
        self.replied: Set[int] = set()
        self.finished = False

    def send(self, kind: MessageKind, sender: int, receiver: int, round_: int,
             payload: Optional[int] = None) -> None:
        self.log.append(Message(kind, sender, receiver, round_, payload))

    def start(self) -> None:
        source = self.graph.source
        first = self.graph.neighbors(source)[0]
        entry = (source, first)
        self.record.add(entry, 0)
        self.record.add((first, source), 0)
        self.ghz_qubit[source] = entry
        self.parity[source] = 0
        self.burn(source, None, 0)

    def burn(self, node: int, parent: Optional[int], round_: int) -> None:
        """Grow the GHZ state over every singlet to a non-parent neighbour."""
        own = self.ghz_qubit[node]
        outstanding = set()
        for neighbour in self.graph.neighbors(node):
            if neighbour == parent:
                continue
            qubit = (node, neighbour)
            payload: Optional[int] = None
            if qubit == own:
                payload = 0
            elif qubit in self.record.members:
                # Far node already joined this singlet; detach our half
                outcome = self.record.members[qubit] ^ self.record.members[own]
                self.trace.record(TraceKind.CNOT, own, qubit)
                self.trace.record(TraceKind.MEASURE_Z, qubit, outcome=outcome)
                self.record.remove(qubit)
            else:
                outcome = int(self.rng.integers(2))
                self.trace.record(TraceKind.CNOT, own, qubit)
                self.trace.record(TraceKind.MEASURE_Z, qubit, outcome=outcome)
                self.record.add((neighbour, node), self.record.members[own] ^ outcome)
                payload = outcome
            self.send(MessageKind.BURN, node, neighbour, round_, payload)
            outstanding.add(neighbour)
        self.pending[node] = outstanding

    def accept(self, node: int, message: Message) -> None:
        entry = (node, message.sender)
        if message.payload:
            self.trace.record(TraceKind.X, entry)
            self.record.members[entry] ^= 1
        self.ghz_qubit[node] = entry
        self.record.parent_of[node] = message.sender
        self.parity[node] = 0

    def try_finish(self, node: int, round_: int) -> None:
        """Leave the GHZ state and report the parity once all Burns are answered."""
        if self.pending.get(node) or node in self.replied:
            return
        source = self.graph.source
        if node == source:
            if not self.finished:
                if self.parity[source]:
                    self.trace.record(TraceKind.Z, self.ghz_qubit[source])
                    self.record.phase ^= 1
                self.finished = True
            return
        parity = self.parity[node]
        if node not in self.keep:
            qubit = self.ghz_qubit[node]
            outcome = int(self.rng.integers(2))
            self.trace.record(TraceKind.MEASURE_X, qubit, outcome=outcome)
            self.record.remove(qubit)
            self.record.phase ^= outcome
            parity ^= outcome
        self.replied.add(node)
        self.send(MessageKind.PHASE_INFO, node, self.record.parent_of[node], round_, parity)

    def final_qubits(self) -> Tuple[Qubit, ...]:
        graph = self.graph
        order = [graph.source, graph.target] + sorted(
            self.keep - {graph.source, graph.target}
        )
        return tuple(self.ghz_qubit[node] for node in order if node in self.ghz_qubit)


def ghz_protocol(
    graph: SingletGraph,
    keep: Optional[Iterable[int]] = None,
    seed: int = 0,
) -> GhzOutcome:
    """
    Grow a GHZ state from A over the burning tree and prune it to `keep`.

    A first joins its lowest-index singlet. A burned node extends the
    GHZ state over every singlet to a non-parent neighbour by CNOT and
    Z measurement, sending the outcome with the Burn; the accepting node
    applies X to its half. A singlet whose far half is already a member
    is detached by a deterministic Z measurement. Every Burn is answered
    once: PhaseInfo by the accepting child after its own Burns are
    answered, NoPhaseError by any other receiver. Nodes outside `keep`
    X-measure before answering; A applies Z^parity at the end. `rounds`
    is the round at which B joins; the round at which the last PhaseInfo
    reaches A is `completion_round`.

    Args:
        graph: Singlet graph
        keep: Nodes that stay in the GHZ state; {A, B} when omitted
        seed: Seed of the measurement outcomes

    Returns:
        GhzOutcome with the run report, the final record and the trace

    Raises:
        ParameterRangeError: If keep misses A or B or names unknown nodes
    """
    keep_set = frozenset(keep) if keep is not None else frozenset()
    keep_set |= {graph.source, graph.target}
    for node in keep_set:
        if not 0 <= node < graph.node_count:
            raise ParameterRangeError(f"keep names unknown node {node}", details={"node": node})

    limit = timeout_round(graph)
    if not graph.neighbors(graph.source):
        report = RouteReport(protocol="ghz", success=False, rounds=limit, messages=0)
        return GhzOutcome(report=report, record=None, trace=Trace())

    run = _GhzRun(graph, keep_set, stream_rng(seed, "routing.ghz", 0))
    run.start()
    delivered = 0
    joined: Optional[int] = None
    round_ = 0
    while True:
        round_ += 1
        inbox = run.log[delivered:]
        delivered = len(run.log)

        burns: Dict[int, List[Message]] = {}
        for message in inbox:
            if message.kind is MessageKind.BURN:
                burns.setdefault(message.receiver, []).append(message)
            else:
                run.pending[message.receiver].discard(message.sender)
                if message.kind is MessageKind.PHASE_INFO:
                    run.parity[message.receiver] ^= message.payload

        accepted = []
        for receiver in sorted(burns):
            incoming = sorted(burns[receiver], key=lambda m: m.sender)
            if receiver not in run.ghz_qubit:
                run.accept(receiver, incoming[0])
                accepted.append(receiver)
                incoming = incoming[1:]
            for message in incoming:
                run.send(MessageKind.NO_PHASE_ERROR, receiver, message.sender, round_)
        for node in accepted:
            run.burn(node, run.record.parent_of[node], round_)
            logger.debug("GHZ round %d: node %d joined via %d", round_, node, run.record.parent_of[node])

        for node in sorted(run.ghz_qubit):
            run.try_finish(node, round_)

        reached = graph.target in run.ghz_qubit
        if reached and joined is None:
            joined = round_
        if run.finished and reached:
            break
        if not reached and round_ >= limit:
            break

    success = run.finished and graph.target in run.ghz_qubit
    path = None
    if success:
        parents: Dict[int, Optional[int]] = dict(run.record.parent_of)
        parents[graph.source] = None
        path = _path_from_parents(parents, graph.target)
    run.trace.final_qubits = run.final_qubits() if success else ()

    report = RouteReport(
        protocol="ghz",
        success=success,
        rounds=joined if success else limit,
        messages=len(run.log),
        path=path,
        completion_round=round_ if success else None,
    )
    logger.debug("GHZ: success=%s rounds=%d members=%d", success, report.rounds, len(run.record.members))
    return GhzOutcome(report=report, record=run.record, trace=run.trace, message_log=run.log)


# =============================================================================
# Oracle replay
# =============================================================================


def _replay_edges(trace: Trace, graph: SingletGraph) -> List[Tuple[int, int]]:
    touched = {tuple(q) for q in trace.qubits()}
    if not touched:
        return sorted(graph.edges)
    return sorted(
        (u, v) for u, v in graph.edges if (u, v) in touched or (v, u) in touched
    )


def replay_trace_with_probabilities(
    trace: Trace, graph: SingletGraph
) -> Tuple[DensityMatrix, List[float]]:
    """
    Execute a trace on explicit singlets and return the final state.

    Every edge holding a traced qubit starts in (|00> + |11>)/sqrt2.
    Measurements are post-selected on the recorded outcome. The state
    is reduced to the trace's final qubits when it names any.

    Returns:
        (state, probabilities of the recorded measurement outcomes)

    Raises:
        ResourceCapError: If the edges exceed the oracle cap
        InconsistentTraceError: If a recorded outcome has zero probability
    """
    edges = _replay_edges(trace, graph)
    if not edges:
        raise BrokenPathError("Nothing to replay: the graph has no singlets")
    if 2 * len(edges) > settings.MAX_QUBITS:
        raise ResourceCapError(
            f"Replay needs {2 * len(edges)} qubits, cap is {settings.MAX_QUBITS}",
            details={"edges": len(edges), "cap": settings.MAX_QUBITS},
        )
    position: Dict[Qubit, int] = {}
    for u, v in edges:
        position[(u, v)] = len(position)
        position[(v, u)] = len(position)

    bell = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_PLUS))
    state = qc.tensor(*([bell] * len(edges)))
    probabilities: List[float] = []

    def where(qubit) -> int:
        qubit = tuple(qubit)
        if qubit not in position:
            raise InconsistentTraceError(f"Qubit {qubit} is not part of the graph")
        return position[qubit]

    def postselect(povm, targets: List[int], label: str) -> None:
        nonlocal state
        outcome = qc.postselect(state, povm, label, targets)
        if outcome.probability <= settings.BRANCH_PROB_FLOOR:
            raise InconsistentTraceError(
                f"Recorded outcome {label} on {targets} has probability {outcome.probability:.3e}"
            )
        probabilities.append(outcome.probability)
        state = outcome.state

    for op in trace.ops:
        targets = [where(q) for q in op.qubits]
        if op.kind is TraceKind.CNOT:
            state = qc.apply_gate(state, qc.CNOT, targets)
        elif op.kind is TraceKind.X:
            state = qc.apply_gate(state, qc.X, targets)
        elif op.kind is TraceKind.Z:
            state = qc.apply_gate(state, qc.Z, targets)
        elif op.kind is TraceKind.BELL_MEASURE:
            state = qc.apply_gate(state, qc.CNOT, targets)
            state = qc.apply_gate(state, qc.H, targets[:1])
            postselect(qc.computational_povm(2), targets, format(op.outcome, "02b"))
        elif op.kind is TraceKind.MEASURE_Z:
            postselect(qc.computational_povm(1), targets, str(op.outcome))
        elif op.kind is TraceKind.MEASURE_X:
            postselect(qc.x_basis_povm(), targets, str(op.outcome))

    if trace.final_qubits:
        state = qc.partial_trace(state, [where(q) for q in trace.final_qubits])
    return state, probabilities


def replay_trace_in_oracle(trace: Trace, graph: SingletGraph) -> DensityMatrix:
    """Final state of a replayed trace."""
    state, _ = replay_trace_with_probabilities(trace, graph)
    return state


# =============================================================================
# Files
# =============================================================================


def read_edge_list(path: Union[str, Path]) -> List[Tuple[int, int]]:
    """
    Read `u v` pairs, one per line; `#` starts a comment.

    Raises:
        ParameterRangeError: On a malformed line
    """
    edges: List[Tuple[int, int]] = []
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            fields = content.split()
            try:
                if len(fields) != 2:
                    raise ValueError(content)
                edges.append((int(fields[0]), int(fields[1])))
            except ValueError:
                raise ParameterRangeError(
                    f"Line {number} of {path} is not a 'u v' pair",
                    details={"line": number, "content": content},
                )
    return edges


def write_edge_list(edges: Iterable[Tuple[int, int]], path: Union[str, Path]) -> None:
    lines = ["# u v"] + [f"{u} {v}" for u, v in sorted(edges)]
    _write_text(path, "\n".join(lines) + "\n")


def write_trace(trace: Trace, path: Union[str, Path]) -> None:
    """Write a trace as JSON for later replay."""
    _write_text(path, json.dumps(trace.to_dict(), indent=2) + "\n")


def read_trace(path: Union[str, Path]) -> Trace:
    with open(path, encoding="utf-8") as handle:
        return Trace.from_dict(json.load(handle))


def _write_text(path: Union[str, Path], text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputPathError(f"Cannot write {path}: {exc}", details={"path": str(path)})
