"""
Multi-copy bond distillation.

Two schemes turn n identical purifiable edges rho(alpha, lam) into a
singlet:

- DSS: a two-stage local measurement that projects onto a distillable
  subspace. A measures pairs of basis states of equal Hamming weight,
  B then measures the matching shifted pairs.
- Recycling: pairwise PCM attempts, where the "00" outcome leaves a new
  purifiable edge that is paired again at the next level.

The closed forms are cross-checked against the density-matrix oracle
in `dss_simulate` and `three_state_branches`.

Example:
    from app.services import distillation

    distillation.dss_success_prob(3, 0.5, 1.0)        # 0.75
    1 - distillation.recycling_fail_prob(4, 0.5, 1.0)  # 0.875
"""

import logging
import math
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.models.distillation import (
    BranchProbs,
    DssMeasurement,
    DssSimulation,
    MonteCarloEstimate,
    RecyclingState,
    Scheme,
)
from app.models.quantum import DensityMatrix, PovmElementSet, RangeClass
from app.models.states import Pms
from app.services import quantum_core as qc
from app.services.guards import clip_unit, require_min, require_probability
from common.utils.exceptions import ParameterRangeError
from common.utils.pool import batch_ranges, merge_sums, run_batches
from common.utils.streams import stream_rng


logger = logging.getLogger(__name__)

# Copies the oracle-backed measurement is built for
DSS_MIN_COPIES = 2
DSS_MAX_COPIES = 4

FAIL_LABEL = "fail"


# =============================================================================
# Distillable subspace scheme
# =============================================================================


def dss_success_prob(n: int, alpha: float, lam: float) -> float:
    """
    Closed-form success probability of the DSS scheme on n copies.

    Sums, over the number m of |01> components and the Hamming weight k
    measured at A, the weight of pairings that survive both stages.

    Raises:
        ParameterRangeError: If n < 2 or a probability leaves [0, 1]
    """
    require_min("n", n, DSS_MIN_COPIES)
    alpha = require_probability("alpha", alpha)
    lam = require_probability("lambda", lam)

    total = 0.0
    for m in range(n + 1):
        mixture = math.comb(n, m) * lam ** (n - m) * (1.0 - lam) ** m
        if mixture == 0.0:
            continue
        inner = 0.0
        for k in range(1, n - m):
            pairs = math.comb(n - m, k) * (math.comb(n - m, k) - 1)
            inner += (
                alpha ** (n - m - k) * (1.0 - alpha) ** k * pairs / (math.comb(n, k) - 1)
            )
        total += mixture * inner
    return clip_unit(total)


def _weight_classes(n: int) -> Dict[int, List[int]]:
    return {k: [x for x in range(1 << n) if bin(x).count("1") == k] for k in range(n + 1)}


def _projector(dim: int, indices: Sequence[int], weight: float = 1.0) -> np.ndarray:
    element = np.zeros((dim, dim), dtype=np.complex128)
    for index in indices:
        element[index, index] = weight
    return element


def pair_label(k: int, a: int, b: int) -> str:
    return f"k{k}:{a}-{b}"


def dss_build_measurement(n: int) -> DssMeasurement:
    """
    Build the A-side POVM and the conditional B-side POVMs.

    A measures C_k(|a><a| + |b><b|) for every unordered pair a != b of
    n-bit strings with equal weight 0 < k < n, plus the two failure
    projectors |0><0| and |2^n - 1><2^n - 1|. C_k is fixed by
    completeness. For outcome (a, b), B measures
    Q_d = |a+d><a+d| + |b+d><b+d| for every d sharing no bit with a or b,
    together with F = I - sum Q_d.

    Raises:
        ParameterRangeError: If n is outside 2..4
    """
    if not DSS_MIN_COPIES <= n <= DSS_MAX_COPIES:
        raise ParameterRangeError(
            f"n must lie in {DSS_MIN_COPIES}..{DSS_MAX_COPIES} for the explicit measurement",
            details={"n": n},
        )
    dim = 1 << n
    classes = _weight_classes(n)

    elements: List[np.ndarray] = [_projector(dim, [0])]
    labels: List[str] = ["fail0"]
    pairs: Dict[str, Tuple[int, int, int]] = {}
    povms_b: Dict[str, PovmElementSet] = {}

    for k in range(1, n):
        members = classes[k]
        scale = 1.0 / (len(members) - 1)
        for a, b in combinations(members, 2):
            label = pair_label(k, a, b)
            elements.append(_projector(dim, [a, b], scale))
            labels.append(label)
            pairs[label] = (k, a, b)
            povms_b[label] = _conditional_povm_b(n, a, b)

    elements.append(_projector(dim, [dim - 1]))
    labels.append(f"fail{n}")

    return DssMeasurement(
        n=n,
        povm_a=PovmElementSet(tuple(elements), tuple(labels)),
        conditional_povms_b=povms_b,
        pairs=pairs,
    )


def _conditional_povm_b(n: int, a: int, b: int) -> PovmElementSet:
    dim = 1 << n
    elements: List[np.ndarray] = []
    labels: List[str] = []
    for d in range(dim):
        if d & (a | b):
            continue
        elements.append(_projector(dim, [a | d, b | d]))
        labels.append(f"d{d}")
    failure = np.eye(dim, dtype=np.complex128) - sum(elements)
    elements.append(failure)
    labels.append(FAIL_LABEL)
    return PovmElementSet(tuple(elements), tuple(labels))


def cross_term_free(n: int, a: int, b: int) -> bool:
    """
    Check that no nonzero eigenvector of rho^(x n) holds |a>|b+y> or |b>|a+y>.

    A term |x>|z> appears in some eigenvector iff the bits of x are a
    subset of the bits of z. The pair (a, b) then yields a maximally
    entangled state for every shift y in J_{a,b}.
    """
    for y in range(1 << n):
        if y & (a | b):
            continue
        if ((b | y) & a) == a or ((a | y) & b) == b:
            return False
    return True


def interleaved_index(x: int, z: int, n: int) -> int:
    """Basis index of |x>_A |z>_B with qubit order A0, B0, A1, B1, ..."""
    index = 0
    for i in range(n):
        shift = n - 1 - i
        index = (index << 2) | (((x >> shift) & 1) << 1) | ((z >> shift) & 1)
    return index


def dss_eigensystem(n: int, alpha: float, lam: float) -> List[Tuple[float, np.ndarray]]:
    """
    Nonzero eigenpairs of rho(alpha, lam)^(x n).

    The bits of y mark the copies in |01>; with l = popcount(y) the
    eigenvalue is lam^(n-l) (1-lam)^l and the eigenvector is
    sum over x disjoint from y of sqrt(alpha^(n-m(x)-l) (1-alpha)^m(x)) |x>|x+y>.
    Vectors use the interleaved qubit order of `interleaved_index`.
    """
    require_min("n", n, 1)
    alpha = require_probability("alpha", alpha)
    lam = require_probability("lambda", lam)

    pairs: List[Tuple[float, np.ndarray]] = []
    dim = 1 << (2 * n)
    for y in range(1 << n):
        noise = bin(y).count("1")
        vector = np.zeros(dim, dtype=np.complex128)
        for x in range(1 << n):
            if x & y:
                continue
            ones = bin(x).count("1")
            vector[interleaved_index(x, x | y, n)] = math.sqrt(
                alpha ** (n - ones - noise) * (1.0 - alpha) ** ones
            )
        pairs.append((lam ** (n - noise) * (1.0 - lam) ** noise, vector))
    return pairs


def _copies(n: int, alpha: float, lam: float) -> DensityMatrix:
    edge = qc.build_pms(alpha, 0.0, lam)
    return qc.tensor(*([edge] * n))


def _logical_block(state: DensityMatrix, n: int, a: int, b: int, d: int) -> DensityMatrix:
    """4x4 block on span{|a>,|b>}_A x span{|a+d>,|b+d>}_B."""
    indices = [
        interleaved_index(x, z, n) for x in (a, b) for z in (a | d, b | d)
    ]
    return DensityMatrix(state.entries[np.ix_(indices, indices)], normalized=False)


def dss_branches(n: int, alpha: float, lam: float) -> List[Tuple[str, str, float, DensityMatrix]]:
    """
    Every (A label, B label, probability, post-state) leaf of the scheme.

    A failures end the tree with B label "-".
    """
    measurement = dss_build_measurement(n)
    state = _copies(n, alpha, lam)
    a_targets = [2 * i for i in range(n)]
    b_targets = [2 * i + 1 for i in range(n)]

    leaves: List[Tuple[str, str, float, DensityMatrix]] = []
    for outcome_a in qc.apply_povm(state, measurement.povm_a, a_targets):
        povm_b = measurement.conditional_povms_b.get(outcome_a.label)
        if povm_b is None or outcome_a.probability <= settings.BRANCH_PROB_FLOOR:
            leaves.append((outcome_a.label, "-", outcome_a.probability, outcome_a.state))
            continue
        for outcome_b in qc.apply_povm(outcome_a.state, povm_b, b_targets):
            leaves.append(
                (
                    outcome_a.label,
                    outcome_b.label,
                    outcome_a.probability * outcome_b.probability,
                    outcome_b.state,
                )
            )
    return leaves


def dss_simulate(n: int, alpha: float, lam: float, seed: int, shots: int) -> DssSimulation:
    """
    Run the DSS measurement on rho(alpha, lam)^(x n) in the oracle.

    Leaf probabilities come from the exact branch tree; `shots` samples
    of it give the Monte Carlo frequency. Every success leaf is checked
    for singlet fidelity on its logical two-qubit block.

    Raises:
        ParameterRangeError: If n is outside 2..4
        ResourceCapError: If 2n exceeds the oracle cap
    """
    require_min("shots", shots, 1)
    measurement = dss_build_measurement(n)
    leaves = dss_branches(n, alpha, lam)

    success_mask = []
    probabilities = []
    min_fidelity: Optional[float] = None
    for label_a, label_b, probability, state in leaves:
        success = label_b not in ("-", FAIL_LABEL)
        success_mask.append(success)
        probabilities.append(probability)
        if success and probability > settings.BRANCH_PROB_FLOOR:
            _, a, b = measurement.pairs[label_a]
            fidelity = qc.singlet_fidelity(_logical_block(state, n, a, b, int(label_b[1:])))
            min_fidelity = fidelity if min_fidelity is None else min(min_fidelity, fidelity)

    weights = np.clip(np.array(probabilities), 0.0, None)
    exact = float(weights[np.array(success_mask)].sum())
    rng = stream_rng(seed, "distillation.dss", n)
    counts = rng.multinomial(shots, weights / weights.sum())
    successes = int(counts[np.array(success_mask)].sum())
    frequency = successes / shots

    logger.debug(
        "DSS n=%d: exact %.12f, %d/%d successes, min fidelity %s",
        n, exact, successes, shots, min_fidelity,
    )
    return DssSimulation(
        n=n,
        shots=shots,
        successes=successes,
        frequency=frequency,
        stderr=math.sqrt(frequency * (1.0 - frequency) / shots),
        exact_probability=clip_unit(exact),
        min_fidelity=min_fidelity,
    )


# =============================================================================
# Recycling scheme
# =============================================================================


def initial_recycling_state(alpha: float, lam: float) -> RecyclingState:
    alpha = require_probability("alpha", alpha)
    lam = require_probability("lambda", lam)
    return RecyclingState(alpha_k=max(alpha, 1.0 - alpha), lambda_k=lam, level=0)


def recycle_update(state: RecyclingState) -> RecyclingState:
    """Parameters of the edge left by the "00" outcome of a PCM on two copies."""
    alpha, lam = state.alpha_k, state.lambda_k
    h = 1.0 - 2.0 * alpha + 2.0 * alpha * alpha
    denominator = 1.0 - 2.0 * lam + 2.0 * lam * lam * (1.0 - alpha + alpha * alpha)
    return RecyclingState(
        alpha_k=clip_unit(alpha * alpha / h),
        lambda_k=clip_unit(lam * lam * h / denominator),
        level=state.level + 1,
    )


def recycling_branch_probs(state: RecyclingState) -> BranchProbs:
    """(c_k, f_k, s_k): new edge, complete failure and singlet for one pair."""
    alpha, lam = state.alpha_k, state.lambda_k
    c = 1.0 - 2.0 * lam + 2.0 * (1.0 - alpha + alpha * alpha) * lam * lam
    f = 2.0 * lam * (1.0 - lam)
    return BranchProbs(c=clip_unit(c), f=clip_unit(f), s=clip_unit(1.0 - c - f))


def recycling_fail_prob(n: int, alpha: float, lam: float) -> float:
    """
    Probability F_n(0) that recycling over n copies yields no singlet.

    F_n(i) sums over the number k of the floor(n/2) pairs at level i
    that leave a new edge, each of the others failing outright:
    C(floor(n/2), k) f_i^(floor(n/2)-k) c_i^k F_k(i+1), with F_0 = 1.
    An unpaired copy is discarded.
    """
    require_min("n", n, 0)
    levels: List[BranchProbs] = []
    state = initial_recycling_state(alpha, lam)

    def branches(level: int) -> BranchProbs:
        nonlocal state
        while len(levels) <= level:
            levels.append(recycling_branch_probs(state))
            state = recycle_update(state)
        return levels[level]

    @lru_cache(maxsize=None)
    def fail(copies: int, level: int) -> float:
        if copies < 2:
            return 1.0
        pairs = copies // 2
        probs = branches(level)
        return sum(
            math.comb(pairs, k) * probs.f ** (pairs - k) * probs.c ** k * fail(k, level + 1)
            for k in range(pairs + 1)
        )

    value = clip_unit(fail(n, 0))
    logger.debug("Recycling F_%d(0) = %.15f over %d levels", n, value, len(levels))
    return value


def recycling_scp(n: int, alpha: float, lam: float) -> float:
    return clip_unit(1.0 - recycling_fail_prob(n, alpha, lam))


# =============================================================================
# Three-state recycling
# =============================================================================


def _support(reduced: DensityMatrix) -> np.ndarray:
    values, vectors = np.linalg.eigh((reduced.entries + reduced.entries.conj().T) / 2)
    return vectors[:, values > settings.PSD_TOL]


def _recyclable_edge(state: DensityMatrix, n: int) -> Optional[Pms]:
    """
    Extract a purifiable edge from a failure branch, if it holds one.

    Both local supports must be two-dimensional; the state compressed
    onto them must have a single product state in its range and gamma 0.
    """
    if state.trace() <= settings.BRANCH_PROB_FLOOR:
        return None
    normalized = DensityMatrix(state.entries / state.trace())
    support_a = _support(qc.partial_trace(normalized, [2 * i for i in range(n)]))
    support_b = _support(qc.partial_trace(normalized, [2 * i + 1 for i in range(n)]))
    if support_a.shape[1] != 2 or support_b.shape[1] != 2:
        return None

    # Reorder to A block then B block before compressing
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    tensor_ = normalized.entries.reshape((2,) * (4 * n))
    tensor_ = tensor_.transpose(order + [2 * n + q for q in order])
    blocked = tensor_.reshape(1 << (2 * n), 1 << (2 * n))
    isometry = np.kron(support_a, support_b)
    compressed = DensityMatrix(isometry.conj().T @ blocked @ isometry)

    if qc.classify_two_qubit_range(compressed) is not RangeClass.ONE:
        return None
    params = qc.extract_pms_parameters(compressed)
    if params.gamma > settings.DISCRIMINANT_TOL:
        return None
    return Pms(alpha=params.alpha, gamma=0.0, lam=params.lam)


@lru_cache(maxsize=256)
def three_state_branches(alpha: float, lam: float) -> Tuple[float, Tuple[Tuple[float, Pms], ...]]:
    """
    Success probability of DSS on three copies and its recyclable failure branches.

    Failure leaves are inspected in the oracle; the ones that still hold
    a purifiable edge are returned with their probability.
    """
    success = 0.0
    recyclable: List[Tuple[float, Pms]] = []
    for _, label_b, probability, state in dss_branches(3, alpha, lam):
        if label_b not in ("-", FAIL_LABEL):
            success += probability
            continue
        if probability <= settings.BRANCH_PROB_FLOOR:
            continue
        edge = _recyclable_edge(state, 3)
        if edge is not None:
            recyclable.append((probability, edge))
    logger.debug(
        "Three-copy DSS at alpha=%.6f lambda=%.6f: success %.12f, %d recyclable branches",
        alpha, lam, success, len(recyclable),
    )
    return clip_unit(success), tuple(recyclable)


def _three_state_trial(n: int, alpha: float, lam: float, rng: np.random.Generator) -> bool:
    pool: Dict[Tuple[float, float], int] = {(alpha, lam): n}
    while pool:
        next_pool: Dict[Tuple[float, float], int] = {}
        for (edge_alpha, edge_lam), count in sorted(pool.items()):
            success, recyclable = three_state_branches(edge_alpha, edge_lam)
            for _ in range(count // 3):
                draw = rng.random()
                if draw < success:
                    return True
                cumulative = success
                for probability, edge in recyclable:
                    cumulative += probability
                    if draw < cumulative:
                        key = (edge.alpha, edge.lam)
                        next_pool[key] = next_pool.get(key, 0) + 1
                        break
        pool = {key: count for key, count in next_pool.items() if count >= 3}
    return False


def _three_state_batch(task: Tuple[int, float, float, int, int, int]) -> Tuple[float]:
    n, alpha, lam, seed, start, stop = task
    hits = 0
    for trial in range(start, stop):
        hits += _three_state_trial(n, alpha, lam, stream_rng(seed, "distillation.three", trial))
    return (float(hits),)


def recycling_scp_three(
    n: int, alpha: float, lam: float, seed: int, trials: int, workers: int = 1
) -> MonteCarloEstimate:
    """
    Monte Carlo SCP of recycling with three-copy DSS groups.

    Copies are split into groups of three (a remainder is discarded);
    each group runs DSS, a success ends the trial, and failure branches
    that still hold a purifiable edge go to the next level.

    Raises:
        ParameterRangeError: If n < 3 or trials < 1
    """
    require_min("n", n, 3)
    require_min("trials", trials, 1)
    alpha = max(require_probability("alpha", alpha), 1.0 - alpha)
    lam = require_probability("lambda", lam)

    tasks = [
        (n, alpha, lam, seed, start, stop)
        for start, stop in batch_ranges(trials, settings.TRIAL_BATCH)
    ]
    (hits,) = merge_sums(run_batches(_three_state_batch, tasks, workers))
    p_hat = hits / trials
    return MonteCarloEstimate(
        p_hat=p_hat,
        stderr=math.sqrt(p_hat * (1.0 - p_hat) / trials),
        trials=trials,
    )


# =============================================================================
# Dispatch
# =============================================================================


def scp(
    n: int,
    alpha: float,
    lam: float,
    scheme: Scheme = Scheme.AUTO,
    seed: int = 0,
    trials: int = 4096,
    workers: int = 1,
) -> float:
    """
    Bond SCP of n identical edges under the given scheme.

    AUTO takes the better of recycling and DSS. THREE is estimated by
    Monte Carlo with the given seed and trial count.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.RECYCLING:
        return recycling_scp(n, alpha, lam)
    if scheme is Scheme.DSS:
        return dss_success_prob(n, alpha, lam)
    if scheme is Scheme.THREE:
        return recycling_scp_three(n, alpha, lam, seed, trials, workers).p_hat
    best = recycling_scp(n, alpha, lam)
    if n >= DSS_MIN_COPIES:
        best = max(best, dss_success_prob(n, alpha, lam))
    return best
