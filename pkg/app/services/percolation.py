"""
Bond percolation on regular lattices.

Lattices are built from integer grids: every geometry is a set of
sites in a box plus a list of forward neighbour offsets. Clusters are
tracked with a union-find forest. One uniform number per bond and trial
drives every estimate, so curves over p are coupled and monotone per
trial.

Example:
    from app.models.lattice import Geometry, LatticeSpec
    from app.services import percolation

    spec = LatticeSpec(geometry=Geometry.SQUARE, linear_size=64)
    estimate = percolation.estimate_threshold(spec, trials=400, resolution=0.005, seed=1)
    print(estimate.p_hat, estimate.ci_low, estimate.ci_high)
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.stats import norm

from app.config import settings
from app.models.distillation import FeasibilityReport, Scheme
from app.models.lattice import (
    Boundary,
    BondConfig,
    ClusterStats,
    Geometry,
    Lattice,
    LatticeSpec,
    ThetaPoint,
    ThresholdEstimate,
)
from app.models.network import SingletGraph
from app.services import distillation
from app.services.guards import require_min, require_probability
from common.utils.exceptions import ParameterRangeError, UnsupportedGeometryError
from common.utils.pool import batch_ranges, run_batches
from common.utils.streams import stream_rng


logger = logging.getLogger(__name__)

# Bond percolation thresholds of the infinite lattices
THRESHOLDS: Dict[Geometry, float] = {
    Geometry.SQUARE: 0.5,
    Geometry.TRIANGULAR: 2.0 * math.sin(math.pi / 18.0),
    Geometry.HONEYCOMB: 1.0 - 2.0 * math.sin(math.pi / 18.0),
    Geometry.SIMPLE_CUBIC: 0.2488,
    Geometry.FCC: 0.1201,
}

# SCP ceilings of two and three copies
SCP_CEILINGS: Dict[int, float] = {2: 0.5, 3: 0.75}

_OFFSETS: Dict[Geometry, Tuple[Tuple[int, ...], ...]] = {
    Geometry.SQUARE: ((1, 0), (0, 1)),
    Geometry.TRIANGULAR: ((1, 0), (0, 1), (1, 1)),
    Geometry.HONEYCOMB: ((1, 0), (0, 1)),
    Geometry.SIMPLE_CUBIC: ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    Geometry.FCC: ((1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)),
}


# =============================================================================
# Lattices
# =============================================================================


def generate_lattice(spec: LatticeSpec) -> Lattice:
    """
    Node indexing and bond list of a lattice.

    2D lattices index (x, y) as x*L + y; the triangular lattice adds
    the (1, 1) diagonal and the honeycomb is a brick wall that keeps
    axis-0 bonds only where x + y is even. Simple cubic uses
    (x*L + y)*L + z. FCC sites are the even-parity points of a doubled
    (2L)^3 grid, 4L^3 sites, ordered lexicographically. Spanning runs
    along axis 0; periodic_transverse wraps the other axes.

    Raises:
        UnsupportedGeometryError: If the geometry has no generator
    """
    geometry = Geometry(spec.geometry)
    if geometry not in _OFFSETS:
        raise UnsupportedGeometryError(f"No generator for geometry {geometry}")

    size = spec.linear_size
    dims = 2 if geometry in (Geometry.SQUARE, Geometry.TRIANGULAR, Geometry.HONEYCOMB) else 3
    side = 2 * size if geometry is Geometry.FCC else size
    shape = (side,) * dims

    coords = np.indices(shape).reshape(dims, -1).T
    if geometry is Geometry.FCC:
        is_site = coords.sum(axis=1) % 2 == 0
    else:
        is_site = np.ones(coords.shape[0], dtype=bool)
    index = np.full(coords.shape[0], -1, dtype=np.int64)
    index[is_site] = np.arange(int(is_site.sum()), dtype=np.int64)
    sites = coords[is_site]
    periodic = spec.boundary is Boundary.PERIODIC_TRANSVERSE

    chunks: List[np.ndarray] = []
    for offset in _OFFSETS[geometry]:
        target = sites + np.array(offset)
        valid = (target[:, 0] >= 0) & (target[:, 0] < side)
        for axis in range(1, dims):
            if periodic:
                target[:, axis] %= side
            else:
                valid &= (target[:, axis] >= 0) & (target[:, axis] < side)
        if geometry is Geometry.HONEYCOMB and offset == (1, 0):
            valid &= sites.sum(axis=1) % 2 == 0
        source_flat = np.ravel_multi_index(sites[valid].T, shape)
        target_flat = np.ravel_multi_index(target[valid].T, shape)
        chunks.append(np.stack([index[source_flat], index[target_flat]], axis=1))

    bonds = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    bonds = np.sort(bonds, axis=1)
    bonds = bonds[bonds[:, 0] != bonds[:, 1]]
    # Small periodic boxes produce each wrapped bond twice
    bonds = np.unique(bonds, axis=0)

    return Lattice(
        spec=spec,
        node_count=int(is_site.sum()),
        bonds=bonds.astype(np.int64),
        left=index[is_site & (coords[:, 0] == 0)],
        right=index[is_site & (coords[:, 0] == side - 1)],
    )


def lattice_graph(spec: LatticeSpec) -> nx.Graph:
    """The lattice as a networkx graph on nodes 0..N-1."""
    lattice = generate_lattice(spec)
    graph = nx.Graph()
    graph.add_nodes_from(range(lattice.node_count))
    graph.add_edges_from(map(tuple, lattice.bonds.tolist()))
    return graph


# =============================================================================
# Clustering
# =============================================================================


class UnionFind:
    """Disjoint-set forest with path compression and union by size."""

    def __init__(self, size: int):
        self.parents = list(range(size))
        self.sizes = [1] * size

    def find(self, element: int) -> int:
        root = element
        while root != self.parents[root]:
            root = self.parents[root]
        while element != root:
            self.parents[element], element = root, self.parents[element]
        return root

    def union(self, a: int, b: int) -> int:
        """Merge the sets of a and b; returns the new root."""
        root_a, root_b = self.find(a), self.find(b)
        if root_a == root_b:
            return root_a
        if self.sizes[root_a] < self.sizes[root_b]:
            root_a, root_b = root_b, root_a
        self.parents[root_b] = root_a
        self.sizes[root_a] += self.sizes[root_b]
        return root_a

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def size_of(self, element: int) -> int:
        return self.sizes[self.find(element)]


def sample_bonds(lattice: Lattice, p: float, rng: np.random.Generator) -> BondConfig:
    p = require_probability("p", p)
    return BondConfig(lattice=lattice, open_bonds=rng.random(lattice.bond_count) < p, p=p)


def cluster_config(config: BondConfig) -> ClusterStats:
    """
    Largest-cluster statistics of one bond configuration.

    `spanning` is set when a largest cluster touches both faces.
    """
    lattice = config.lattice
    forest = UnionFind(lattice.node_count)
    for u, v in lattice.bonds[config.open_bonds].tolist():
        forest.union(u, v)

    roots = [forest.find(node) for node in range(lattice.node_count)]
    largest = max(forest.sizes[root] for root in roots)
    left_roots = {roots[node] for node in lattice.left.tolist()}
    spanning = any(
        roots[node] in left_roots and forest.sizes[roots[node]] == largest
        for node in lattice.right.tolist()
    )
    return ClusterStats(
        largest_cluster_size=largest,
        spanning=spanning,
        theta_hat=largest / lattice.node_count,
    )


def sample_and_cluster(spec: LatticeSpec, p: float, seed: int, index: int = 0) -> ClusterStats:
    """Open each bond with probability p and cluster the result."""
    lattice = generate_lattice(spec)
    config = sample_bonds(lattice, p, stream_rng(seed, "percolation", index))
    return cluster_config(config)


def _sweep(
    lattice: Lattice, uniforms: np.ndarray, p_grid: Sequence[float]
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Add bonds in increasing uniform order.

    Returns the critical p at which a cluster first touches both faces,
    and the largest cluster size and spanning flag at each grid point
    (bonds with uniform below p are open).
    """
    nodes = lattice.node_count
    forest = UnionFind(nodes)
    touches_left = [False] * nodes
    touches_right = [False] * nodes
    for node in lattice.left.tolist():
        touches_left[node] = True
    for node in lattice.right.tolist():
        touches_right[node] = True

    order = np.argsort(uniforms, kind="stable")
    bonds = lattice.bonds[order].tolist()
    values = uniforms[order].tolist()
    grid = list(p_grid)

    largest_at = np.zeros(len(grid), dtype=np.int64)
    spanning_at = np.zeros(len(grid), dtype=bool)
    largest = 1
    spanned = False
    critical = 1.0

    position = 0
    for step in range(len(bonds) + 1):
        threshold = values[step] if step < len(bonds) else math.inf
        while position < len(grid) and grid[position] <= threshold:
            largest_at[position] = largest
            spanning_at[position] = spanned
            position += 1
        if step == len(bonds):
            break

        u, v = bonds[step]
        root_u, root_v = forest.find(u), forest.find(v)
        if root_u == root_v:
            continue
        root = forest.union(root_u, root_v)
        touches_left[root] = touches_left[root_u] or touches_left[root_v]
        touches_right[root] = touches_right[root_u] or touches_right[root_v]
        largest = max(largest, forest.sizes[root])
        if not spanned and touches_left[root] and touches_right[root]:
            spanned = True
            critical = values[step]
    return critical, largest_at, spanning_at


def _sweep_batch(task: Tuple[LatticeSpec, Tuple[float, ...], int, int, int]):
    spec, p_grid, seed, start, stop = task
    lattice = generate_lattice(spec)
    critical = []
    largest = []
    spanning = []
    for trial in range(start, stop):
        uniforms = stream_rng(seed, "percolation", trial).random(lattice.bond_count)
        point, sizes, spans = _sweep(lattice, uniforms, p_grid)
        critical.append(point)
        largest.append(sizes)
        spanning.append(spans)
    return critical, largest, spanning


def _run_sweeps(
    spec: LatticeSpec, p_grid: Sequence[float], trials: int, seed: int, workers: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    tasks = [
        (spec, tuple(float(p) for p in p_grid), seed, start, stop)
        for start, stop in batch_ranges(trials, settings.TRIAL_BATCH)
    ]
    critical: List[float] = []
    largest: List[np.ndarray] = []
    spanning: List[np.ndarray] = []
    for part in run_batches(_sweep_batch, tasks, workers):
        critical.extend(part[0])
        largest.extend(part[1])
        spanning.extend(part[2])
    width = len(p_grid)
    return (
        np.array(critical),
        np.array(largest, dtype=np.int64).reshape(trials, width),
        np.array(spanning, dtype=bool).reshape(trials, width),
    )


def critical_points(spec: LatticeSpec, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """
    Per-trial spanning thresholds p*.

    A trial spans at p exactly when p >= p*, so the spanning frequency
    at p is the empirical CDF of these values.
    """
    require_min("trials", trials, 1)
    critical, _, _ = _run_sweeps(spec, (), trials, seed, workers)
    return critical


def theta_curve(
    spec: LatticeSpec,
    p_grid: Sequence[float],
    trials: int,
    seed: int = 0,
    workers: int = 1,
) -> List[ThetaPoint]:
    """
    Spanning frequency and largest-cluster fraction over a grid of p.

    Every trial uses one uniform per bond for all grid points.
    """
    require_min("trials", trials, 1)
    for p in p_grid:
        require_probability("p", p)
    grid = sorted(float(p) for p in p_grid)

    lattice = generate_lattice(spec)
    _, largest, spanning = _run_sweeps(spec, grid, trials, seed, workers)
    theta = largest / lattice.node_count

    points = []
    for column, p in enumerate(grid):
        values = theta[:, column]
        stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        points.append(
            ThetaPoint(
                p=p,
                spanning_freq=float(spanning[:, column].mean()),
                theta_hat=float(values.mean()),
                stderr=stderr,
            )
        )
    return points


def estimate_threshold(
    spec: LatticeSpec,
    trials: int,
    resolution: float,
    seed: int = 0,
    workers: int = 1,
    p_min: float = 0.0,
    p_max: float = 1.0,
    confidence: float = 0.95,
) -> ThresholdEstimate:
    """
    Crossing point of the spanning frequency with 1/2.

    The frequency is evaluated on a grid of spacing `resolution` in
    [p_min, p_max] and interpolated linearly around the crossing. The
    interval propagates the binomial error sqrt(1/(4 trials)) of the
    frequency through the local slope.

    Raises:
        ParameterRangeError: If trials < 100 or the grid is empty
    """
    require_min("trials", trials, 100)
    p_min = require_probability("p_min", p_min)
    p_max = require_probability("p_max", p_max)
    if not 0.0 < resolution <= p_max - p_min:
        raise ParameterRangeError(
            "resolution must be positive and no wider than the p window",
            details={"resolution": resolution},
        )

    critical = np.sort(critical_points(spec, trials, seed, workers))
    grid = np.arange(p_min, p_max + resolution / 2.0, resolution)
    frequency = np.searchsorted(critical, grid, side="right") / trials

    above = np.nonzero(frequency >= 0.5)[0]
    if above.size == 0 or above[0] == 0:
        edge = float(grid[-1] if above.size == 0 else grid[0])
        logger.warning(
            "Spanning frequency does not cross 1/2 inside [%.4f, %.4f] for %s L=%d",
            p_min, p_max, spec.geometry.value, spec.linear_size,
        )
        return ThresholdEstimate(
            p_hat=edge, ci_low=edge, ci_high=edge, converged=False, trials=trials
        )

    upper = int(above[0])
    p0, p1 = float(grid[upper - 1]), float(grid[upper])
    f0, f1 = float(frequency[upper - 1]), float(frequency[upper])
    p_hat = p0 + (0.5 - f0) / (f1 - f0) * (p1 - p0)
    slope = (f1 - f0) / (p1 - p0)
    half_width = norm.ppf(0.5 + confidence / 2.0) * math.sqrt(0.25 / trials) / slope

    logger.info(
        "Threshold %s L=%d: p_hat=%.5f +- %.5f over %d trials",
        spec.geometry.value, spec.linear_size, p_hat, half_width, trials,
    )
    return ThresholdEstimate(
        p_hat=p_hat,
        ci_low=max(0.0, p_hat - half_width),
        ci_high=min(1.0, p_hat + half_width),
        converged=True,
        trials=trials,
    )


# =============================================================================
# Feasibility
# =============================================================================


def cep_feasible(
    n_edges: int,
    alpha: float,
    lam: float,
    geometry: Geometry,
    scheme: Scheme = Scheme.AUTO,
) -> FeasibilityReport:
    """
    Compare the bond SCP of n edges with the lattice threshold.

    Feasibility needs a strict excess over the threshold.
    """
    geometry = Geometry(geometry)
    scp = distillation.scp(n_edges, alpha, lam, scheme)
    threshold = THRESHOLDS[geometry]
    return FeasibilityReport(
        scp=scp,
        threshold=threshold,
        feasible=scp > threshold,
        scheme=Scheme(scheme),
        ceiling=SCP_CEILINGS.get(n_edges),
    )


def singlet_graph_from_bonds(
    config: BondConfig, source: Optional[int] = None, target: Optional[int] = None
) -> SingletGraph:
    """
    Singlet graph of the open bonds.

    Endpoints default to the first node of the left face and the last
    node of the right face.
    """
    lattice = config.lattice
    if source is None:
        source = int(lattice.left[0])
    if target is None:
        target = int(lattice.right[-1])
    edges = frozenset(map(tuple, lattice.bonds[config.open_bonds].tolist()))
    return SingletGraph(
        node_count=lattice.node_count, edges=edges, source=source, target=target
    )
