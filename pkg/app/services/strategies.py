"""
Quantum preprocessing strategies on two-edge bonds.

Compares classical entanglement percolation (convert every bond to a
singlet first) with direct and hybrid swapping, evaluates the square
protocol with XZ-swapping, and treats the diamond and tree hierarchies
both by their classical recursions and by Monte Carlo hybrid reduction.

Example:
    from app.models.strategy import BondPair, HierarchyKind, HierarchySpec
    from app.services import strategies

    bond = BondPair.of(alpha=0.7, beta=0.5, lam=0.9, nu=0.9)
    print(strategies.pms_strategy_report(bond, bond))
    spec = HierarchySpec(kind=HierarchyKind.TREE, iteration=2, bond=bond)
    print(strategies.tree_cep(spec), strategies.hybrid_hierarchy_sim(spec, seed=1, trials=2000))
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from app.config import settings
from app.models.distillation import MonteCarloEstimate
from app.models.lattice import Geometry
from app.models.states import PureSchmidt
from app.models.strategy import (
    SIMULATION_MAX_ITERATION,
    BondPair,
    FccCheck,
    HierarchyKind,
    HierarchySpec,
    PureComparison,
    SquareReport,
    StrategyReport,
)
from app.services import protocols
from app.services.guards import clip_unit, require_min
from app.services.percolation import THRESHOLDS
from common.utils.exceptions import ParameterRangeError
from common.utils.pool import batch_ranges, merge_sums, run_batches
from common.utils.streams import stream_rng


logger = logging.getLogger(__name__)

SOURCE = 0
TARGET = 1


# =============================================================================
# Two-edge bonds
# =============================================================================


def pure_three_methods(alpha: PureSchmidt, beta: PureSchmidt) -> PureComparison:
    """
    Pure edges |alpha> and |beta> per bond.

    - CEP: (min(1, 2(1 - alpha beta)))^2
    - direct swapping: 1 - (1 - 2(1 - alpha))(1 - 2(1 - beta))
    - hybrid: min(1, 2(1 - alpha beta))
    """
    a = protocols.canonicalize(alpha).alpha
    b = protocols.canonicalize(beta).alpha
    hybrid = protocols.majorization_pair_prob(alpha, beta)
    direct = 1.0 - (1.0 - 2.0 * (1.0 - a)) * (1.0 - 2.0 * (1.0 - b))
    return PureComparison(
        p_cep=clip_unit(hybrid * hybrid),
        p_direct=clip_unit(direct),
        p_hybrid=hybrid,
    )


def pure_report(alphas: Sequence[float], betas: Sequence[float]) -> List[Dict[str, float]]:
    """Rows of pure_three_methods over an alpha x beta grid."""
    rows = []
    for alpha in alphas:
        for beta in betas:
            result = pure_three_methods(PureSchmidt(alpha=alpha), PureSchmidt(alpha=beta))
            rows.append(
                {
                    "alpha": alpha,
                    "beta": beta,
                    "p_cep": result.p_cep,
                    "p_direct": result.p_direct,
                    "p_hybrid": result.p_hybrid,
                }
            )
    return rows


def _bond_terms(bond: BondPair) -> Tuple[float, float, float]:
    """(lam nu, alpha(1 - beta), beta(1 - alpha))."""
    alpha, beta = bond.edge1.alpha, bond.edge2.alpha
    return bond.edge1.lam * bond.edge2.lam, alpha * (1.0 - beta), beta * (1.0 - alpha)


def pms_strategy_report(bond1: BondPair, bond2: BondPair) -> StrategyReport:
    """
    Two identical bonds (rho(alpha, lam), rho(beta, nu)) in series.

    Returns:
        StrategyReport with
        p_cep = (2 lam nu min[alpha(1-beta), beta(1-alpha)])^2,
        p_d* = 2 lam^2 nu^2 min[alpha^2 (1-beta)^2, beta^2 (1-alpha)^2],
        p_d = 2 lam^2 nu^2 alpha beta (1-alpha)(1-beta),
        p_h = 2 lam^2 nu^2 [alpha(1-beta) + beta(1-alpha)] min[...]

    Raises:
        ParameterRangeError: If the bonds differ
    """
    if bond1 != bond2:
        raise ParameterRangeError("Both bonds must carry the same edge parameters")
    weight, first, second = _bond_terms(bond1)
    smaller = min(first, second)
    weight2 = weight * weight
    return StrategyReport(
        p_cep=clip_unit((2.0 * weight * smaller) ** 2),
        p_d=clip_unit(2.0 * weight2 * first * second),
        p_d_star=clip_unit(2.0 * weight2 * smaller * smaller),
        p_h=clip_unit(2.0 * weight2 * (first + second) * smaller),
        context=f"alpha={bond1.edge1.alpha} beta={bond1.edge2.alpha}",
    )


def conversion_prob(bond: BondPair) -> float:
    """Bond-to-singlet probability p_conv of PCM plus filtering."""
    return protocols.scp_pair(bond.edge1, bond.edge2)


def square_protocol_prob(bond: BondPair) -> SquareReport:
    """
    Four identical bonds forming a square between A and B.

    Every bond is converted by PCM (probability p_c) into |alpha_hat>.
    With one complete path the two edges are swapped and filtered;
    with both paths the edges are XZ-swapped, the two results merged
    and filtered:

        p_sq = 4 p_c^2 (1 - p_c^2)(1 - alpha_hat) + p_c^4 min(1, 2(1 - alpha_tilde^2))

    The classical reference converts each bond to a singlet first:
    p_cep_tilde = 1 - (1 - p_conv^2)^2.
    """
    result = protocols.pcm(bond.edge1, bond.edge2)
    p_conv = conversion_prob(bond)
    p_cep_tilde = clip_unit(1.0 - (1.0 - p_conv * p_conv) ** 2)
    if result.result is None:
        return SquareReport(p_sq=0.0, p_cep_tilde=p_cep_tilde, p_c=0.0)

    p_c = result.success_prob
    alpha_hat = protocols.canonicalize(result.result).alpha
    alpha_tilde = protocols.xz_swap(PureSchmidt(alpha=alpha_hat), PureSchmidt(alpha=alpha_hat)).alpha
    p_c2 = p_c * p_c
    p_sq = 4.0 * p_c2 * (1.0 - p_c2) * (1.0 - alpha_hat) + p_c2 * p_c2 * min(
        1.0, 2.0 * (1.0 - alpha_tilde * alpha_tilde)
    )
    return SquareReport(
        p_sq=clip_unit(p_sq),
        p_cep_tilde=p_cep_tilde,
        p_c=p_c,
        alpha_hat=alpha_hat,
        alpha_tilde=alpha_tilde,
    )


def fcc_embedding_check(bond: BondPair) -> FccCheck:
    """
    FCC network with every bond split into two two-edge bonds.

    Hybrid swapping percolates when p_h exceeds the FCC threshold;
    classical percolation needs p_cep above it.
    """
    report = pms_strategy_report(bond, bond)
    threshold = THRESHOLDS[Geometry.FCC]
    return FccCheck(
        p_hybrid=report.p_h,
        p_cep=report.p_cep,
        threshold=threshold,
        feasible_hybrid=report.p_h > threshold,
        feasible_cep=report.p_cep > threshold,
    )


def locate_window(
    predicate: Callable[[float], bool], grid: Sequence[float]
) -> List[Tuple[float, float]]:
    """Maximal runs of consecutive grid points where predicate holds, as (first, last)."""
    windows: List[Tuple[float, float]] = []
    start: Optional[float] = None
    previous: Optional[float] = None
    for value in grid:
        if predicate(value):
            if start is None:
                start = value
            previous = value
        elif start is not None:
            windows.append((start, previous))
            start = None
    if start is not None:
        windows.append((start, previous))
    return windows


# =============================================================================
# Hierarchies
# =============================================================================


def _require_kind(spec: HierarchySpec, kind: HierarchyKind) -> None:
    if spec.kind is not kind:
        raise ParameterRangeError(
            f"Expected a {kind.value} hierarchy, got {spec.kind.value}",
            details={"kind": spec.kind.value},
        )


def diamond_recursion(p_conv: float, iteration: int) -> float:
    """p_1 = p_conv, p_i = 1 - (1 - p_{i-1}^2)^2."""
    p = p_conv
    for _ in range(iteration - 1):
        p = 1.0 - (1.0 - p * p) ** 2
    return clip_unit(p)


def tree_recursion(p_conv: float, iteration: int) -> float:
    """p_0 = 1, p_i = 1 - (1 - p_{i-1} p_conv^2)^2."""
    p = 1.0
    for _ in range(iteration):
        p = 1.0 - (1.0 - p * p_conv * p_conv) ** 2
    return clip_unit(p)


def diamond_cep(spec: HierarchySpec) -> float:
    """Classical percolation success on the diamond hierarchy."""
    _require_kind(spec, HierarchyKind.DIAMOND)
    return diamond_recursion(conversion_prob(spec.bond), spec.iteration)


def tree_cep(spec: HierarchySpec) -> float:
    """Classical percolation success on the tree hierarchy."""
    _require_kind(spec, HierarchyKind.TREE)
    return tree_recursion(conversion_prob(spec.bond), spec.iteration)


def diamond_network(iteration: int) -> Tuple[nx.MultiGraph, int, int]:
    """
    Diamond hierarchy: iteration 1 is a single bond, each further
    iteration replaces every bond by a square.

    Returns:
        (graph, A, B); one graph edge per bond
    """
    require_min("iteration", iteration, 1)
    graph = nx.MultiGraph()
    graph.add_edge(SOURCE, TARGET)
    for _ in range(iteration - 1):
        refined = nx.MultiGraph()
        refined.add_nodes_from(graph.nodes)
        next_node = graph.number_of_nodes()
        for u, v in sorted(graph.edges()):
            for middle in (next_node, next_node + 1):
                refined.add_edge(u, middle)
                refined.add_edge(middle, v)
            next_node += 2
        graph = refined
    return graph, SOURCE, TARGET


def tree_network(iteration: int) -> Tuple[nx.MultiGraph, int, int]:
    """
    Tree hierarchy: G_i is two parallel copies of bond, G_{i-1}, bond
    in series; G_0 is a single node.

    Returns:
        (graph, A, B); one graph edge per bond
    """
    require_min("iteration", iteration, 1)
    graph = nx.MultiGraph()
    graph.add_nodes_from((SOURCE, TARGET))

    def grow(a: int, b: int, level: int) -> None:
        for _ in range(2):
            entry = graph.number_of_nodes()
            graph.add_node(entry)
            exit_ = entry
            if level > 1:
                exit_ = graph.number_of_nodes()
                graph.add_node(exit_)
                grow(entry, exit_, level - 1)
            graph.add_edge(a, entry)
            graph.add_edge(exit_, b)

    grow(SOURCE, TARGET, iteration)
    return graph, SOURCE, TARGET


def hierarchy_network(kind: HierarchyKind, iteration: int) -> Tuple[nx.MultiGraph, int, int]:
    if HierarchyKind(kind) is HierarchyKind.DIAMOND:
        return diamond_network(iteration)
    return tree_network(iteration)


# -----------------------------------------------------------------------------
# Hybrid reduction
# -----------------------------------------------------------------------------


def _merge_parallel(graph: nx.MultiGraph) -> None:
    pairs = {tuple(sorted((u, v))) for u, v in graph.edges() if graph.number_of_edges(u, v) > 1}
    for u, v in sorted(pairs):
        alphas = [data["alpha"] for data in graph.get_edge_data(u, v).values()]
        merged = PureSchmidt(alpha=alphas[0])
        for alpha in alphas[1:]:
            merged = protocols.concentrate_bond(merged, PureSchmidt(alpha=alpha))
        graph.remove_edges_from([(u, v)] * len(alphas))
        graph.add_edge(u, v, alpha=merged.alpha)


def _prune_dangling(graph: nx.MultiGraph, source: int, target: int) -> None:
    while True:
        dangling = [
            node for node in graph.nodes
            if node not in (source, target) and graph.degree(node) <= 1
        ]
        if not dangling:
            return
        graph.remove_nodes_from(dangling)


def _swap_junction(graph: nx.MultiGraph, node: int, rng: np.random.Generator) -> None:
    """
    Replace the two edges at a degree-2 node by one swapped edge.

    The XZ-swap applies only when the two input edges are equal and the
    outer nodes stay connected through another route once the node is
    removed; the swapped edge is then merged in parallel later. Every
    other junction samples the pure swap outcome.
    """
    (u, first), (w, second) = [
        (neighbour, data["alpha"]) for _, neighbour, data in graph.edges(node, data=True)
    ]
    graph.remove_node(node)
    left, right = PureSchmidt(alpha=first), PureSchmidt(alpha=second)
    if abs(first - second) <= protocols.EQUAL_ALPHA_TOL and nx.has_path(graph, u, w):
        alpha = protocols.xz_swap(left, right).alpha
    else:
        outcomes = protocols.swap_pure(left, right)
        weights = np.array([outcome.probability for outcome in outcomes])
        chosen = outcomes[int(rng.choice(len(outcomes), p=weights / weights.sum()))]
        alpha = protocols.canonicalize(chosen.result).alpha
    graph.add_edge(u, w, alpha=alpha)


def _hybrid_trial(
    template: nx.MultiGraph,
    p_c: float,
    alpha_hat: float,
    random_order: bool,
    rng: np.random.Generator,
) -> float:
    """Probability that one sampled network ends in a singlet between A and B."""
    graph = nx.MultiGraph()
    graph.add_nodes_from(template.nodes)
    edges = sorted(template.edges())
    for (u, v), draw in zip(edges, rng.random(len(edges))):
        if draw < p_c:
            graph.add_edge(u, v, alpha=alpha_hat)
    if not nx.has_path(graph, SOURCE, TARGET):
        return 0.0
    graph = nx.MultiGraph(graph.subgraph(nx.node_connected_component(graph, SOURCE)))

    while True:
        _merge_parallel(graph)
        _prune_dangling(graph, SOURCE, TARGET)
        junctions = [
            node for node in sorted(graph.nodes)
            if node not in (SOURCE, TARGET) and graph.degree(node) == 2
        ]
        if not junctions:
            break
        node = junctions[int(rng.integers(len(junctions)))] if random_order else junctions[0]
        _swap_junction(graph, node, rng)

    if graph.number_of_nodes() != 2 or graph.number_of_edges(SOURCE, TARGET) != 1:
        raise ParameterRangeError(
            "Network does not reduce by series and parallel steps",
            details={"nodes": graph.number_of_nodes()},
        )
    (alpha,) = [data["alpha"] for data in graph.get_edge_data(SOURCE, TARGET).values()]
    return protocols.procrustean_prob(PureSchmidt(alpha=alpha))


def _hybrid_batch(task: Tuple[str, int, float, float, bool, int, int, int]) -> Tuple[float, float]:
    kind, iteration, p_c, alpha_hat, random_order, seed, start, stop = task
    template, _, _ = hierarchy_network(HierarchyKind(kind), iteration)
    total = 0.0
    squares = 0.0
    for trial in range(start, stop):
        rng = stream_rng(seed, "strategies.hybrid", trial)
        value = _hybrid_trial(template, p_c, alpha_hat, random_order, rng)
        total += value
        squares += value * value
    return total, squares


def hybrid_hierarchy_sim(
    spec: HierarchySpec,
    seed: int = 0,
    trials: int = 10_000,
    workers: int = 1,
    random_order: bool = False,
) -> MonteCarloEstimate:
    """
    Monte Carlo hybrid reduction of a diamond or tree network.

    Each trial converts every bond by PCM, destroying failed bonds, then
    repeatedly merges parallel edges with concentrate_bond, removes
    dangling edges and swaps at the lowest-index internal degree-2
    node. A trial contributes the filtering probability of the final
    A-B edge, or 0 when A and B are disconnected.

    Args:
        spec: Hierarchy kind, iteration and bond
        seed: Master seed
        trials: Number of sampled networks
        workers: Worker processes
        random_order: Swap at a random eligible node instead of the lowest-index one

    Returns:
        MonteCarloEstimate of the success probability

    Raises:
        ParameterRangeError: If the iteration exceeds the simulation cap
    """
    if spec.iteration > SIMULATION_MAX_ITERATION:
        raise ParameterRangeError(
            f"Simulation supports iterations up to {SIMULATION_MAX_ITERATION}",
            details={"iteration": spec.iteration},
        )
    require_min("trials", trials, 2)

    result = protocols.pcm(spec.bond.edge1, spec.bond.edge2)
    if result.result is None or result.success_prob == 0.0:
        return MonteCarloEstimate(p_hat=0.0, stderr=0.0, trials=trials)
    alpha_hat = protocols.canonicalize(result.result).alpha

    tasks = [
        (spec.kind.value, spec.iteration, result.success_prob, alpha_hat, random_order, seed, start, stop)
        for start, stop in batch_ranges(trials, settings.TRIAL_BATCH)
    ]
    total, squares = merge_sums(run_batches(_hybrid_batch, tasks, workers))
    mean = total / trials
    variance = max(0.0, (squares / trials - mean * mean) * trials / (trials - 1))
    estimate = MonteCarloEstimate(
        p_hat=clip_unit(mean), stderr=math.sqrt(variance / trials), trials=trials
    )
    logger.info(
        "Hybrid %s i=%d: p_hat=%.4f +- %.4f over %d trials",
        spec.kind.value, spec.iteration, estimate.p_hat, estimate.stderr, trials,
    )
    return estimate
