import networkx as nx
import numpy as np
import pytest

from app.models.distillation import Scheme
from app.models.lattice import Boundary, BondConfig, Geometry, LatticeSpec
from app.services import percolation
from common.utils.exceptions import ParameterRangeError
from common.utils.streams import stream_rng


def spec(geometry, size=4, boundary=Boundary.OPEN):
    return LatticeSpec(geometry=geometry, linear_size=size, boundary=boundary)


def _all_bonds(lattice, is_open):
    return BondConfig(
        lattice=lattice,
        open_bonds=np.full(lattice.bond_count, is_open),
        p=1.0 if is_open else 0.0,
    )


# =============================================================================
# Lattices
# =============================================================================


def test_square_matches_networkx_grid():
    graph = percolation.lattice_graph(spec(Geometry.SQUARE, 5))
    assert nx.is_isomorphic(graph, nx.grid_2d_graph(5, 5))


def test_simple_cubic_matches_networkx_grid():
    lattice = percolation.generate_lattice(spec(Geometry.SIMPLE_CUBIC, 3))
    assert lattice.node_count == 27
    assert lattice.bond_count == nx.grid_graph(dim=[3, 3, 3]).number_of_edges()


@pytest.mark.parametrize(
    "geometry, size, bonds",
    [
        (Geometry.SQUARE, 4, 24),
        (Geometry.TRIANGULAR, 4, 33),
        (Geometry.HONEYCOMB, 4, 18),
        (Geometry.SIMPLE_CUBIC, 4, 144),
    ],
)
def test_open_bond_counts(geometry, size, bonds):
    assert percolation.generate_lattice(spec(geometry, size)).bond_count == bonds


@pytest.mark.parametrize(
    "geometry, max_degree",
    [
        (Geometry.SQUARE, 4),
        (Geometry.TRIANGULAR, 6),
        (Geometry.HONEYCOMB, 3),
        (Geometry.SIMPLE_CUBIC, 6),
        (Geometry.FCC, 12),
    ],
)
def test_coordination_numbers(geometry, max_degree):
    lattice = percolation.generate_lattice(spec(geometry, 4, Boundary.PERIODIC_TRANSVERSE))
    assert lattice.degrees().max() == max_degree


def test_fcc_site_count():
    lattice = percolation.generate_lattice(spec(Geometry.FCC, 2))
    assert lattice.node_count == 4 * 2**3
    assert nx.is_connected(percolation.lattice_graph(spec(Geometry.FCC, 2)))


def test_periodic_square_wraps_transverse_axis():
    periodic = percolation.generate_lattice(spec(Geometry.SQUARE, 4, Boundary.PERIODIC_TRANSVERSE))
    assert periodic.bond_count == 4 * 3 + 4 * 4


def test_small_periodic_box_has_no_duplicate_bonds():
    lattice = percolation.generate_lattice(spec(Geometry.SQUARE, 2, Boundary.PERIODIC_TRANSVERSE))
    assert lattice.bond_count == 4
    assert len({tuple(bond) for bond in lattice.bonds.tolist()}) == 4


def test_faces_are_first_and_last_layer():
    lattice = percolation.generate_lattice(spec(Geometry.SQUARE, 3))
    assert lattice.left.tolist() == [0, 1, 2]
    assert lattice.right.tolist() == [6, 7, 8]


# =============================================================================
# Clustering
# =============================================================================


def test_union_find_merges_and_sizes():
    forest = percolation.UnionFind(5)
    forest.union(0, 1)
    forest.union(3, 4)
    forest.union(1, 4)
    assert forest.connected(0, 3)
    assert not forest.connected(0, 2)
    assert forest.size_of(4) == 4


def test_cluster_all_closed():
    lattice = percolation.generate_lattice(spec(Geometry.SQUARE, 4))
    stats = percolation.cluster_config(_all_bonds(lattice, False))
    assert stats.largest_cluster_size == 1
    assert not stats.spanning
    assert stats.theta_hat == pytest.approx(1 / 16)


def test_cluster_all_open():
    lattice = percolation.generate_lattice(spec(Geometry.TRIANGULAR, 4))
    stats = percolation.cluster_config(_all_bonds(lattice, True))
    assert stats.spanning
    assert stats.theta_hat == 1.0


def test_cluster_single_row_spans():
    lattice = percolation.generate_lattice(spec(Geometry.SQUARE, 3))
    row = {(0, 3), (3, 6)}
    open_bonds = np.array([tuple(bond) in row for bond in lattice.bonds.tolist()])
    stats = percolation.cluster_config(BondConfig(lattice=lattice, open_bonds=open_bonds, p=0.5))
    assert stats.spanning
    assert stats.largest_cluster_size == 3


def test_sample_and_cluster_is_seeded():
    first = percolation.sample_and_cluster(spec(Geometry.SQUARE, 8), 0.5, seed=3)
    second = percolation.sample_and_cluster(spec(Geometry.SQUARE, 8), 0.5, seed=3)
    assert first == second


def open_bond_graph(config):
    graph = nx.Graph()
    graph.add_nodes_from(range(config.lattice.node_count))
    graph.add_edges_from(map(tuple, config.lattice.bonds[config.open_bonds].tolist()))
    return graph


@pytest.mark.parametrize("boundary", list(Boundary))
@pytest.mark.parametrize(
    "geometry, size",
    [
        (Geometry.SQUARE, 8),
        (Geometry.TRIANGULAR, 8),
        (Geometry.HONEYCOMB, 8),
        (Geometry.SIMPLE_CUBIC, 5),
        (Geometry.FCC, 3),
    ],
)
def test_clustering_matches_networkx_components(geometry, size, boundary):
    lattice_spec = spec(geometry, size, boundary)
    lattice = percolation.generate_lattice(lattice_spec)
    left, right = set(lattice.left.tolist()), set(lattice.right.tolist())
    p_c = percolation.THRESHOLDS[geometry]
    for index, p in enumerate(np.linspace(0.5 * p_c, min(1.0, 1.5 * p_c), 12)):
        config = percolation.sample_bonds(
            lattice, float(p), stream_rng(11, "percolation", index)
        )
        stats = percolation.cluster_config(config)
        components = list(nx.connected_components(open_bond_graph(config)))
        largest = max(len(component) for component in components)
        spans = any(
            len(component) == largest and component & left and component & right
            for component in components
        )
        assert stats.largest_cluster_size == largest
        assert stats.spanning == spans
        assert stats.theta_hat == pytest.approx(largest / lattice.node_count)

        seeded = percolation.sample_and_cluster(lattice_spec, float(p), seed=11, index=index)
        assert seeded == stats


# =============================================================================
# Curves and thresholds
# =============================================================================


def test_theta_curve_limits():
    points = percolation.theta_curve(spec(Geometry.SQUARE, 6), [1.0, 0.0], trials=20, seed=1)
    low, high = points
    assert (low.p, high.p) == (0.0, 1.0)
    assert low.spanning_freq == 0.0
    assert low.theta_hat == pytest.approx(1 / 36)
    assert high.spanning_freq == 1.0
    assert high.theta_hat == 1.0


def test_theta_curve_is_monotone():
    grid = np.linspace(0.0, 1.0, 21)
    points = percolation.theta_curve(spec(Geometry.SQUARE, 8), grid, trials=30, seed=2)
    frequencies = [point.spanning_freq for point in points]
    thetas = [point.theta_hat for point in points]
    assert frequencies == sorted(frequencies)
    assert thetas == sorted(thetas)


def test_theta_curve_rejects_bad_p():
    with pytest.raises(ParameterRangeError):
        percolation.theta_curve(spec(Geometry.SQUARE, 4), [1.5], trials=5)


def test_critical_points_do_not_depend_on_workers():
    single = percolation.critical_points(spec(Geometry.SQUARE, 6), trials=80, seed=4, workers=1)
    pooled = percolation.critical_points(spec(Geometry.SQUARE, 6), trials=80, seed=4, workers=2)
    np.testing.assert_array_equal(single, pooled)


def test_square_threshold_estimate():
    estimate = percolation.estimate_threshold(
        spec(Geometry.SQUARE, 16), trials=400, resolution=0.01, seed=5
    )
    assert estimate.converged
    assert estimate.ci_low <= estimate.p_hat <= estimate.ci_high
    assert estimate.p_hat == pytest.approx(0.5, abs=0.05)


@pytest.mark.slow
def test_triangular_threshold_estimate():
    estimate = percolation.estimate_threshold(
        spec(Geometry.TRIANGULAR, 48), trials=1000, resolution=0.005, seed=6
    )
    reference = percolation.THRESHOLDS[Geometry.TRIANGULAR]
    assert estimate.p_hat == pytest.approx(reference, abs=0.02)


@pytest.mark.slow
@pytest.mark.parametrize(
    "geometry, size, boundary, trials, seed",
    [
        (Geometry.HONEYCOMB, 48, Boundary.OPEN, 1000, 8),
        (Geometry.SIMPLE_CUBIC, 16, Boundary.PERIODIC_TRANSVERSE, 600, 9),
        (Geometry.FCC, 10, Boundary.PERIODIC_TRANSVERSE, 400, 10),
    ],
)
def test_threshold_estimate_matches_reference(geometry, size, boundary, trials, seed):
    estimate = percolation.estimate_threshold(
        spec(geometry, size, boundary), trials=trials, resolution=0.005, seed=seed
    )
    assert estimate.converged
    assert estimate.p_hat == pytest.approx(percolation.THRESHOLDS[geometry], abs=0.02)


def test_threshold_outside_window_is_not_converged():
    estimate = percolation.estimate_threshold(
        spec(Geometry.SQUARE, 8), trials=100, resolution=0.01, seed=7, p_min=0.0, p_max=0.05
    )
    assert not estimate.converged


@pytest.mark.parametrize(
    "kwargs", [{"trials": 50, "resolution": 0.01}, {"trials": 100, "resolution": 0.0}]
)
def test_threshold_rejects_bad_arguments(kwargs):
    with pytest.raises(ParameterRangeError):
        percolation.estimate_threshold(spec(Geometry.SQUARE, 4), **kwargs)


# =============================================================================
# Feasibility and graphs
# =============================================================================


def test_two_singlet_copies_sit_on_the_square_threshold():
    report = percolation.cep_feasible(2, 0.5, 1.0, Geometry.SQUARE)
    assert report.scp == pytest.approx(0.5)
    assert not report.feasible
    assert report.ceiling == 0.5


def test_two_singlet_copies_percolate_on_triangular():
    assert percolation.cep_feasible(2, 0.5, 1.0, Geometry.TRIANGULAR).feasible


def test_feasibility_uses_the_scheme():
    report = percolation.cep_feasible(3, 0.5, 1.0, Geometry.SQUARE, Scheme.DSS)
    assert report.scp == pytest.approx(0.75)
    assert report.feasible
    assert report.scheme is Scheme.DSS
    assert report.ceiling == 0.75


def test_thresholds_are_ordered_by_coordination():
    thresholds = percolation.THRESHOLDS
    assert thresholds[Geometry.FCC] < thresholds[Geometry.SIMPLE_CUBIC] < thresholds[Geometry.TRIANGULAR]
    assert thresholds[Geometry.TRIANGULAR] + thresholds[Geometry.HONEYCOMB] == pytest.approx(1.0)


def test_singlet_graph_from_open_bonds():
    lattice = percolation.generate_lattice(spec(Geometry.SQUARE, 3))
    graph = percolation.singlet_graph_from_bonds(_all_bonds(lattice, True))
    assert (graph.source, graph.target) == (0, 8)
    assert len(graph.edges) == lattice.bond_count
