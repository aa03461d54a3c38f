import numpy as np
import pytest

from app.models.lattice import Geometry
from app.models.states import PureSchmidt
from app.models.strategy import BondPair, HierarchyKind, HierarchySpec
from app.services import strategies
from app.services.percolation import THRESHOLDS
from common.utils.exceptions import ParameterRangeError


SQUARE_BOND = BondPair.of(alpha=0.55, beta=0.5, lam=0.98, nu=0.98)


def hierarchy(kind, iteration, bond=SQUARE_BOND):
    return HierarchySpec(kind=kind, iteration=iteration, bond=bond)


# =============================================================================
# Two-edge bonds
# =============================================================================


def test_pure_methods_for_singlets():
    result = strategies.pure_three_methods(PureSchmidt(alpha=0.5), PureSchmidt(alpha=0.5))
    assert (result.p_cep, result.p_direct, result.p_hybrid) == pytest.approx((1.0, 1.0, 1.0))


def test_pure_methods_closed_forms():
    result = strategies.pure_three_methods(PureSchmidt(alpha=0.9), PureSchmidt(alpha=0.8))
    assert result.p_hybrid == pytest.approx(0.56)
    assert result.p_cep == pytest.approx(0.56**2)
    assert result.p_direct == pytest.approx(0.52)


def test_pure_report_grid():
    rows = strategies.pure_report([0.6, 0.7], [0.5, 0.8, 0.9])
    assert len(rows) == 6
    assert all(row["p_hybrid"] >= row["p_cep"] for row in rows)


def test_pms_strategy_report_values():
    bond = BondPair.of(alpha=0.7, beta=0.5, lam=0.9, nu=0.9)
    report = strategies.pms_strategy_report(bond, bond)
    assert report.p_cep == pytest.approx(0.243**2)
    assert report.p_d == pytest.approx(2 * 0.6561 * 0.35 * 0.15)
    assert report.p_d_star == pytest.approx(2 * 0.6561 * 0.15**2)
    assert report.p_h == pytest.approx(2 * 0.6561 * 0.5 * 0.15)


ALPHAS = [round(0.045 * step, 3) for step in range(1, 21)]
BETAS = ALPHAS[1::2]


@pytest.mark.parametrize("lam, nu", [(1.0, 1.0), (0.9, 0.8)])
def test_strategy_ordering_over_the_parameter_grid(lam, nu):
    for alpha in ALPHAS:
        for beta in BETAS:
            bond = BondPair.of(alpha=alpha, beta=beta, lam=lam, nu=nu)
            report = strategies.pms_strategy_report(bond, bond)
            assert report.p_h >= report.p_d >= report.p_d_star
            if alpha == beta:
                assert report.p_h == pytest.approx(report.p_cep, abs=1e-12)
            else:
                assert report.p_h > report.p_cep + 1e-9


def test_pms_strategy_report_needs_equal_bonds():
    with pytest.raises(ParameterRangeError):
        strategies.pms_strategy_report(SQUARE_BOND, BondPair.of(0.6, 0.5, 1.0, 1.0))


def test_bond_rejects_gamma():
    from app.models.states import Pms

    with pytest.raises(ValueError):
        BondPair(edge1=Pms(alpha=0.5, gamma=0.1, lam=1.0), edge2=Pms(alpha=0.5, gamma=0.0, lam=1.0))


# =============================================================================
# Square protocol
# =============================================================================


def test_square_protocol_reference_point():
    report = strategies.square_protocol_prob(SQUARE_BOND)
    assert report.p_c == pytest.approx(0.4802)
    assert report.alpha_hat == pytest.approx(0.55)
    assert report.alpha_tilde == pytest.approx(0.57053, abs=1e-4)
    assert report.p_sq == pytest.approx(0.37253, abs=5e-4)
    assert report.p_cep_tilde == pytest.approx(0.33867, abs=1e-4)


def test_square_protocol_beats_classical_on_triangular():
    report = strategies.square_protocol_prob(SQUARE_BOND)
    assert report.p_sq > THRESHOLDS[Geometry.TRIANGULAR] >= report.p_cep_tilde


def test_square_protocol_of_singlet_edges():
    report = strategies.square_protocol_prob(BondPair.of(0.5, 0.5, 1.0, 1.0))
    assert report.p_sq == pytest.approx(7 / 16)


def test_square_protocol_without_pure_part():
    report = strategies.square_protocol_prob(BondPair.of(0.6, 0.5, 0.0, 1.0))
    assert report.p_sq == 0.0
    assert report.p_c == 0.0


# =============================================================================
# FCC embedding
# =============================================================================


@pytest.mark.parametrize(
    "alpha, hybrid, cep",
    [(0.65, True, True), (0.66, True, False), (0.75, True, False), (0.77, False, False)],
)
def test_fcc_embedding(alpha, hybrid, cep):
    check = strategies.fcc_embedding_check(BondPair.of(alpha, 0.5, 1.0, 1.0))
    assert check.threshold == THRESHOLDS[Geometry.FCC]
    assert (check.feasible_hybrid, check.feasible_cep) == (hybrid, cep)


def test_fcc_window():
    grid = [round(value, 3) for value in np.arange(0.6, 0.8, 0.001)]

    def gap(alpha):
        check = strategies.fcc_embedding_check(BondPair.of(alpha, 0.5, 1.0, 1.0))
        return check.feasible_hybrid and not check.feasible_cep

    ((low, high),) = strategies.locate_window(gap, grid)
    assert low == pytest.approx(0.654)
    assert high == pytest.approx(0.759)


def test_locate_window_runs():
    assert strategies.locate_window({2, 3, 5}.__contains__, [1, 2, 3, 4, 5]) == [(2, 3), (5, 5)]
    assert strategies.locate_window(lambda _: False, [1, 2]) == []


# =============================================================================
# Hierarchies
# =============================================================================


def test_diamond_recursion():
    assert strategies.diamond_recursion(0.3, 1) == pytest.approx(0.3)
    assert strategies.diamond_recursion(0.5, 2) == pytest.approx(0.4375)
    assert strategies.diamond_recursion(1.0, 5) == 1.0
    assert strategies.diamond_recursion(0.0, 5) == 0.0


def test_tree_recursion_first_level_is_a_square():
    assert strategies.tree_recursion(0.6, 1) == pytest.approx(strategies.diamond_recursion(0.6, 2))


def test_cep_on_hierarchies():
    p_conv = strategies.conversion_prob(SQUARE_BOND)
    diamond = strategies.diamond_cep(hierarchy(HierarchyKind.DIAMOND, 3))
    tree = strategies.tree_cep(hierarchy(HierarchyKind.TREE, 2))
    assert diamond == pytest.approx(strategies.diamond_recursion(p_conv, 3))
    assert tree == pytest.approx(strategies.tree_recursion(p_conv, 2))


def test_cep_checks_the_hierarchy_kind():
    with pytest.raises(ParameterRangeError, match="diamond"):
        strategies.diamond_cep(hierarchy(HierarchyKind.TREE, 2))


@pytest.mark.parametrize("iteration, nodes, edges", [(1, 2, 1), (2, 4, 4), (3, 12, 16)])
def test_diamond_network_shape(iteration, nodes, edges):
    graph, source, target = strategies.diamond_network(iteration)
    assert (graph.number_of_nodes(), graph.number_of_edges()) == (nodes, edges)
    assert (source, target) == (strategies.SOURCE, strategies.TARGET)


@pytest.mark.parametrize("iteration, nodes, edges", [(1, 4, 4), (2, 10, 12), (3, 22, 28)])
def test_tree_network_shape(iteration, nodes, edges):
    graph, _, _ = strategies.tree_network(iteration)
    assert (graph.number_of_nodes(), graph.number_of_edges()) == (nodes, edges)


def test_hybrid_single_bond_matches_conversion():
    estimate = strategies.hybrid_hierarchy_sim(hierarchy(HierarchyKind.DIAMOND, 1), seed=1, trials=4000)
    expected = strategies.conversion_prob(SQUARE_BOND)
    assert abs(estimate.p_hat - expected) < 5 * estimate.stderr + 1e-12


@pytest.mark.parametrize("kind, iteration", [(HierarchyKind.TREE, 1), (HierarchyKind.DIAMOND, 2)])
def test_hybrid_square_matches_square_protocol(kind, iteration):
    estimate = strategies.hybrid_hierarchy_sim(hierarchy(kind, iteration), seed=2, trials=4000)
    expected = strategies.square_protocol_prob(SQUARE_BOND).p_sq
    assert abs(estimate.p_hat - expected) < 5 * estimate.stderr


def test_hybrid_is_reproducible_across_workers():
    spec = hierarchy(HierarchyKind.TREE, 2)
    single = strategies.hybrid_hierarchy_sim(spec, seed=3, trials=300, workers=1)
    pooled = strategies.hybrid_hierarchy_sim(spec, seed=3, trials=300, workers=2)
    assert single.p_hat == pytest.approx(pooled.p_hat, abs=1e-12)


def test_hybrid_random_order_reduces_too():
    spec = hierarchy(HierarchyKind.DIAMOND, 3)
    estimate = strategies.hybrid_hierarchy_sim(spec, seed=4, trials=200, random_order=True)
    assert 0.0 <= estimate.p_hat <= 1.0


def test_hybrid_without_pure_part():
    spec = hierarchy(HierarchyKind.TREE, 2, BondPair.of(0.6, 0.5, 0.0, 1.0))
    assert strategies.hybrid_hierarchy_sim(spec, trials=10).p_hat == 0.0


def test_hybrid_iteration_cap():
    with pytest.raises(ParameterRangeError, match="iterations up to"):
        strategies.hybrid_hierarchy_sim(hierarchy(HierarchyKind.DIAMOND, 5), trials=10)


@pytest.mark.slow
def test_hybrid_beats_classical_on_deep_tree():
    spec = hierarchy(HierarchyKind.TREE, 3)
    estimate = strategies.hybrid_hierarchy_sim(spec, seed=5, trials=20_000)
    assert estimate.p_hat > strategies.tree_cep(spec)
