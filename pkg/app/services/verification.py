"""
Formula-vs-oracle suites.

Each suite draws random parameters from its own seed stream, evaluates
a closed form and the same operation in the density-matrix oracle, and
reports the largest disagreement. Classification and routing suites
count mismatches as an error of 1.

Example:
    from app.services import verification

    report = verification.run_suite("pcm", draws=1000, seed=7)
    verification.require_passed([report])
"""

import logging
from typing import Callable, Dict, Iterable, List

import networkx as nx
import numpy as np

from app.config import settings
from app.models.quantum import DensityMatrix, PovmOutcome, RangeClass
from app.models.network import SingletGraph
from app.models.states import Pms, PureSchmidt, SwapLabel
from app.models.verification import SuiteReport
from app.services import distillation, protocols, routing
from app.services import quantum_core as qc
from app.services.guards import require_min
from common.utils.exceptions import AcceptanceError, ParameterRangeError
from common.utils.streams import stream_rng


logger = logging.getLogger(__name__)

TOLERANCE = 1e-10

# Gate for the XZ measurement basis
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)

# Largest graph whose full singlet state the routing suite replays
REPLAY_MAX_EDGES = 5


# =============================================================================
# Helpers
# =============================================================================


def _uniform(rng: np.random.Generator, low: float, high: float) -> float:
    return float(rng.uniform(low, high))


def _draw_pms(rng: np.random.Generator) -> Pms:
    """A Pms with every weight at least 0.05."""
    alpha = _uniform(rng, 0.05, 0.85)
    gamma = _uniform(rng, 0.0, 0.95 - alpha)
    return Pms(alpha=alpha, gamma=gamma, lam=_uniform(rng, 0.05, 0.95))


def _magnitude_gap(actual: np.ndarray, expected: np.ndarray) -> float:
    """Entry-wise gap of |entries|, blind to local diagonal phases."""
    return float(np.max(np.abs(np.abs(actual) - np.abs(expected))))


def _weighted(outcome: PovmOutcome) -> np.ndarray:
    if outcome.state.normalized:
        return outcome.probability * outcome.state.entries
    return outcome.state.entries


def _by_label(outcomes: Iterable[PovmOutcome]) -> Dict[str, PovmOutcome]:
    return {outcome.label: outcome for outcome in outcomes}


def _pcm_oracle(state1: Pms, state2: Pms) -> Dict[str, PovmOutcome]:
    """CNOTs A1->A2 and B1->B2, then measure the second pair."""
    joint = qc.tensor(qc.pms_state(state1), qc.pms_state(state2))
    joint = qc.apply_gate(joint, qc.CNOT, [0, 2])
    joint = qc.apply_gate(joint, qc.CNOT, [1, 3])
    return _by_label(qc.apply_povm(joint, qc.computational_povm(2), [2, 3]))


def _kept(outcome: PovmOutcome, keep: List[int]) -> DensityMatrix:
    return qc.partial_trace(outcome.state, keep)


# =============================================================================
# Suites
# =============================================================================


def _check_pcm(rng: np.random.Generator) -> float:
    state1, state2 = _draw_pms(rng), _draw_pms(rng)
    oracle = _pcm_oracle(state1, state2)
    branches = protocols.pcm_branches(state1, state2)
    errors = [
        abs(oracle["11"].probability - branches.success),
        abs(oracle["00"].probability - branches.recycle),
        abs(oracle["01"].probability + oracle["10"].probability - branches.fail),
    ]
    if branches.pure is not None:
        smaller = 1.0 - qc.schmidt_weight(_kept(oracle["11"], [0, 1]))
        errors.append(abs(smaller - branches.pure.alpha))
    if branches.recycled is not None and oracle["00"].probability > settings.BRANCH_PROB_FLOOR:
        expected = qc.pms_state(branches.recycled).entries
        errors.append(_magnitude_gap(_kept(oracle["00"], [0, 1]).entries, expected))
    return max(errors)


def _swap_oracle(state1: Pms, state2: Pms) -> Dict[str, PovmOutcome]:
    joint = qc.tensor(qc.pms_state(state1), qc.pms_state(state2))
    return _by_label(qc.apply_povm(joint, qc.bell_povm(), [1, 2]))


def _check_swap(rng: np.random.Generator) -> float:
    state1, state2 = _draw_pms(rng), _draw_pms(rng)
    oracle = _swap_oracle(state1, state2)
    errors = []
    for outcome in protocols.swap_pms(state1, state2):
        measured = oracle[outcome.label.value]
        errors.append(abs(measured.probability - outcome.probability))
        if outcome.result is not None and measured.probability > settings.BRANCH_PROB_FLOOR:
            expected = qc.pms_state(outcome.result).entries
            errors.append(_magnitude_gap(_kept(measured, [0, 3]).entries, expected))
    return max(errors)


def _check_swap_special(rng: np.random.Generator) -> float:
    state1 = Pms.purifiable_state(_uniform(rng, 0.05, 0.95), _uniform(rng, 0.05, 1.0))
    state2 = Pms.purifiable_state(_uniform(rng, 0.05, 0.95), _uniform(rng, 0.05, 1.0))
    oracle = _swap_oracle(state1, state2)

    mixture = np.zeros((4, 4), dtype=np.complex128)
    for label, correction in ((SwapLabel.PSI_PLUS, None), (SwapLabel.PSI_MINUS, qc.Z)):
        outcome = oracle[label.value]
        if outcome.probability <= settings.BRANCH_PROB_FLOOR:
            continue
        kept = _kept(outcome, [0, 3])
        if correction is not None:
            kept = qc.apply_gate(kept, correction, [1])
        mixture += outcome.probability * kept.entries
    rejected = oracle[SwapLabel.PHI_PLUS.value].probability + oracle[SwapLabel.PHI_MINUS.value].probability
    mixture[1, 1] += rejected

    expected = qc.pms_state(protocols.swap_pms_special(state1, state2)).entries
    return float(np.max(np.abs(mixture - expected)))


def _check_swap_pure(rng: np.random.Generator) -> float:
    alpha, beta = _uniform(rng, 0.05, 0.95), _uniform(rng, 0.05, 0.95)
    joint = qc.tensor(qc.pure_schmidt_state(alpha), qc.pure_schmidt_state(beta))
    oracle = _by_label(qc.apply_povm(joint, qc.bell_povm(), [1, 2]))
    errors = []
    for outcome in protocols.swap_pure(PureSchmidt(alpha=alpha), PureSchmidt(alpha=beta)):
        measured = oracle[outcome.label.value]
        errors.append(abs(measured.probability - outcome.probability))
        larger = max(outcome.result.alpha, 1.0 - outcome.result.alpha)
        errors.append(abs(qc.schmidt_weight(_kept(measured, [0, 3])) - larger))
    return max(errors)


def _check_xz(rng: np.random.Generator) -> float:
    alpha = _uniform(rng, 0.05, 0.95)
    joint = qc.tensor(qc.pure_schmidt_state(alpha), qc.pure_schmidt_state(alpha))
    joint = qc.apply_gate(joint, CZ, [1, 2])
    joint = qc.apply_gate(joint, qc.H, [1])
    joint = qc.apply_gate(joint, qc.H, [2])
    expected = protocols.xz_swap(PureSchmidt(alpha=alpha), PureSchmidt(alpha=alpha)).alpha
    errors = []
    for outcome in qc.apply_povm(joint, qc.computational_povm(2), [1, 2]):
        errors.append(abs(outcome.probability - 0.25))
        errors.append(abs(qc.schmidt_weight(_kept(outcome, [0, 3])) - expected))
    return max(errors)


def _check_procrustean(rng: np.random.Generator) -> float:
    alpha = _uniform(rng, 0.05, 0.95)
    outcome = qc.postselect(
        qc.pure_schmidt_state(alpha), qc.procrustean_filter(alpha), "success", [0]
    )
    expected = protocols.procrustean_prob(PureSchmidt(alpha=alpha))
    return max(abs(outcome.probability - expected), 1.0 - qc.singlet_fidelity(outcome.state))


def _check_recycle(rng: np.random.Generator) -> float:
    state = distillation.initial_recycling_state(
        _uniform(rng, 0.5, 0.95), _uniform(rng, 0.05, 1.0)
    )
    copy = Pms.purifiable_state(state.alpha_k, state.lambda_k)
    oracle = _pcm_oracle(copy, copy)
    probs = distillation.recycling_branch_probs(state)
    errors = [
        abs(oracle["00"].probability - probs.c),
        abs(oracle["01"].probability + oracle["10"].probability - probs.f),
        abs(oracle["11"].probability - probs.s),
    ]
    if oracle["00"].probability > settings.BRANCH_PROB_FLOOR:
        following = distillation.recycle_update(state)
        expected = qc.pms_state(Pms.purifiable_state(following.alpha_k, following.lambda_k))
        errors.append(_magnitude_gap(_kept(oracle["00"], [0, 1]).entries, expected.entries))
    return max(errors)


def _check_classifier(rng: np.random.Generator) -> float:
    weight = _uniform(rng, 0.05, 0.95)
    bell_plus = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_PLUS)).entries
    bell_minus = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_MINUS)).entries
    product = np.zeros((4, 4), dtype=np.complex128)
    product[0, 0], product[1, 1] = weight, 1.0 - weight

    cases = [
        (qc.pms_state(_draw_pms(rng)), RangeClass.ONE),
        (DensityMatrix(weight * bell_plus + (1.0 - weight) * bell_minus), RangeClass.TWO),
        (DensityMatrix(product), RangeClass.INFINITELY_MANY),
    ]
    return float(sum(qc.classify_two_qubit_range(state) is not expected for state, expected in cases))


def _check_dss(rng: np.random.Generator, index: int) -> float:
    n = distillation.DSS_MIN_COPIES + index % (distillation.DSS_MAX_COPIES - 1)
    alpha, lam = _uniform(rng, 0.05, 0.95), _uniform(rng, 0.05, 1.0)
    simulation = distillation.dss_simulate(n, alpha, lam, seed=index, shots=1)
    error = abs(simulation.exact_probability - distillation.dss_success_prob(n, alpha, lam))
    if simulation.min_fidelity is not None:
        error = max(error, 1.0 - simulation.min_fidelity)
    return error


def _random_graph(rng: np.random.Generator) -> SingletGraph:
    node_count = int(rng.integers(2, 7))
    edges = [
        (u, v)
        for u in range(node_count)
        for v in range(u + 1, node_count)
        if rng.random() < 0.5
    ]
    return SingletGraph.from_edges(edges, source=0, target=node_count - 1, node_count=node_count)


def _check_routing(rng: np.random.Generator, index: int) -> float:
    graph = _random_graph(rng)
    reference = graph.to_networkx()
    connected = nx.has_path(reference, graph.source, graph.target)

    report = routing.burning_route(graph)
    errors = [
        float(report.success != connected),
        float(report.rounds > routing.timeout_round(graph)),
        float(report.success and report.rounds >= routing.timeout_round(graph)),
    ]
    path = routing.controller_path(graph)
    errors.append(float((path is not None) != connected))
    if not connected or path is None:
        return max(errors)

    errors.append(float(len(path) - 1 != nx.shortest_path_length(reference, graph.source, graph.target)))
    errors.append(float(report.path_length != len(path) - 1))

    if len(path) - 1 <= REPLAY_MAX_EDGES:
        trace = routing.swap_chain_trace(path, seed=index, graph=graph)
        errors.append(1.0 - qc.singlet_fidelity(routing.replay_trace_in_oracle(trace, graph)))

    outcome = routing.ghz_protocol(graph, seed=index)
    errors.append(float(not outcome.report.success))
    component = reference.subgraph(nx.node_connected_component(reference, graph.source))
    if outcome.report.success and component.number_of_edges() <= REPLAY_MAX_EDGES:
        state = routing.replay_trace_in_oracle(outcome.trace, graph)
        errors.append(1.0 - qc.singlet_fidelity(state))
    return max(errors)


_SIMPLE: Dict[str, Callable[[np.random.Generator], float]] = {
    "pcm": _check_pcm,
    "swap": _check_swap,
    "swap-special": _check_swap_special,
    "swap-pure": _check_swap_pure,
    "xz": _check_xz,
    "procrustean": _check_procrustean,
    "recycle": _check_recycle,
    "classifier": _check_classifier,
}
_INDEXED: Dict[str, Callable[[np.random.Generator, int], float]] = {
    "dss": _check_dss,
    "routing": _check_routing,
}

SUITES = tuple(_SIMPLE) + tuple(_INDEXED)


def run_suite(name: str, draws: int, seed: int) -> SuiteReport:
    """
    Run one suite over `draws` random parameter tuples.

    Raises:
        ParameterRangeError: For an unknown suite or draws < 1
    """
    require_min("draws", draws, 1)
    if name not in SUITES:
        raise ParameterRangeError(
            f"Unknown suite {name!r}", details={"suites": list(SUITES) + ["all"]}
        )

    max_error = 0.0
    for index in range(draws):
        rng = stream_rng(seed, f"verification.{name}", index)
        if name in _SIMPLE:
            error = _SIMPLE[name](rng)
        else:
            error = _INDEXED[name](rng, index)
        max_error = max(max_error, error)

    report = SuiteReport(
        suite=name,
        draws=draws,
        max_error=max_error,
        tolerance=TOLERANCE,
        passed=max_error < TOLERANCE,
    )
    logger.info("Suite %s: max error %.3e over %d draws", name, max_error, draws)
    return report


def run_suites(names: Iterable[str], draws: int, seed: int) -> List[SuiteReport]:
    """Run the named suites in order; "all" expands to every suite."""
    expanded: List[str] = []
    for name in names:
        expanded.extend(SUITES if name == "all" else [name])
    return [run_suite(name, draws, seed) for name in expanded]


def require_passed(reports: Iterable[SuiteReport]) -> None:
    """
    Raises:
        AcceptanceError: If any suite exceeded its tolerance
    """
    failed = [report for report in reports if not report.passed]
    if failed:
        raise AcceptanceError(
            "Verification failed: " + ", ".join(
                f"{r.suite} (max error {r.max_error:.3e})" for r in failed
            ),
            details={"suites": [r.suite for r in failed]},
        )
