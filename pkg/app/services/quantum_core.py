"""
Exact density-matrix simulation of few-qubit local protocols.

This is the ground truth every closed-form formula is checked against.
States are dense complex matrices on at most MAX_QUBITS qubits with
big-endian qubit order. Gates and measurements act on a subset of
qubits through tensor contraction, so no full-size operator is built.

Example:
    from app.services import quantum_core as qc

    rho = qc.tensor(qc.build_pms(0.7, 0.0, 0.9), qc.build_pms(0.5, 0.0, 0.8))
    rho = qc.apply_gate(rho, qc.CNOT, [0, 2])
    rho = qc.apply_gate(rho, qc.CNOT, [1, 3])
    for outcome in qc.apply_povm(rho, qc.computational_povm(2), targets=[2, 3]):
        print(outcome.label, outcome.probability)
"""

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np

from app.config import settings
from app.models.quantum import (
    DensityMatrix,
    KetState,
    PovmElementSet,
    PovmOutcome,
    RangeClass,
)
from app.models.states import Pms, SwapLabel
from app.services.guards import clip_unit, require_probability, require_simplex
from common.utils.exceptions import (
    InvalidOperatorError,
    ParameterRangeError,
    QubitIndexError,
    WrongQubitCountError,
)


logger = logging.getLogger(__name__)

SQRT_HALF = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)

# Bell kets in the |00>,|01>,|10>,|11> basis
BELL_KETS = {
    SwapLabel.PSI_PLUS: SQRT_HALF * np.array([1, 0, 0, 1], dtype=np.complex128),
    SwapLabel.PSI_MINUS: SQRT_HALF * np.array([1, 0, 0, -1], dtype=np.complex128),
    SwapLabel.PHI_PLUS: SQRT_HALF * np.array([0, 1, 1, 0], dtype=np.complex128),
    SwapLabel.PHI_MINUS: SQRT_HALF * np.array([0, 1, -1, 0], dtype=np.complex128),
}


# =============================================================================
# Construction
# =============================================================================


def build_pms(alpha: float, gamma: float, lam: float) -> DensityMatrix:
    """
    Build rho(alpha, gamma, lam) = lam|alpha,gamma><alpha,gamma| + (1-lam)|01><01|.

    Args:
        alpha: Weight of |00> in the pure part
        gamma: Weight of |01> in the pure part
        lam: Weight of the pure part

    Returns:
        Validated two-qubit density matrix

    Raises:
        ParameterRangeError: If a parameter leaves [0, 1] or alpha + gamma > 1
    """
    alpha = require_probability("alpha", alpha)
    gamma = require_probability("gamma", gamma)
    lam = require_probability("lambda", lam)
    require_simplex(alpha, gamma)

    pure = np.array(
        [np.sqrt(alpha), np.sqrt(gamma), 0.0, np.sqrt(max(0.0, 1.0 - alpha - gamma))],
        dtype=np.complex128,
    )
    entries = lam * np.outer(pure, pure.conj())
    entries[1, 1] += 1.0 - lam
    state = DensityMatrix(entries)
    state.validate()
    return state


def pms_state(pms: Pms) -> DensityMatrix:
    """Density matrix of a Pms model."""
    return build_pms(pms.alpha, pms.gamma, pms.lam)


def pure_schmidt_state(alpha: float) -> DensityMatrix:
    """sqrt(alpha)|00> + sqrt(1-alpha)|11> as a density matrix."""
    return build_pms(alpha, 0.0, 1.0)


def bell_state(label: SwapLabel) -> KetState:
    return KetState(BELL_KETS[SwapLabel(label)])


def ket_to_density(ket: KetState) -> DensityMatrix:
    return DensityMatrix(np.outer(ket.amplitudes, ket.amplitudes.conj()))


def tensor(*states: DensityMatrix) -> DensityMatrix:
    """Kronecker product; the first argument holds the leading qubits."""
    if not states:
        raise ParameterRangeError("tensor needs at least one state")
    entries = states[0].entries
    for state in states[1:]:
        entries = np.kron(entries, state.entries)
    return DensityMatrix(entries, normalized=all(s.normalized for s in states))


# =============================================================================
# Local operations
# =============================================================================


def _check_targets(targets: Sequence[int], num_qubits: int) -> List[int]:
    targets = [int(t) for t in targets]
    if not targets:
        raise QubitIndexError("At least one target qubit is required")
    if len(set(targets)) != len(targets):
        raise QubitIndexError("Target qubits must be distinct", details={"targets": targets})
    for target in targets:
        if not 0 <= target < num_qubits:
            raise QubitIndexError(
                f"Qubit {target} is outside 0..{num_qubits - 1}",
                details={"targets": targets, "num_qubits": num_qubits},
            )
    return targets


def _contract(tensor_: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    count = len(axes)
    op_tensor = op.reshape((2,) * (2 * count))
    moved = np.tensordot(op_tensor, tensor_, axes=(list(range(count, 2 * count)), list(axes)))
    return np.moveaxis(moved, list(range(count)), list(axes))


def _conjugate(entries: np.ndarray, op: np.ndarray, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """K rho K^dagger with K acting on `targets`."""
    tensor_ = entries.reshape((2,) * (2 * num_qubits))
    tensor_ = _contract(tensor_, op, targets)
    tensor_ = _contract(tensor_, op.conj(), [num_qubits + t for t in targets])
    dim = 1 << num_qubits
    return tensor_.reshape(dim, dim)


def apply_gate(state: DensityMatrix, gate: np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    """
    Conjugate state by a unitary acting on `targets`.

    Args:
        state: Input state
        gate: Unitary of side 2^len(targets); its leading qubit is targets[0]
        targets: Distinct qubit indices

    Returns:
        New density matrix with the same trace

    Raises:
        InvalidOperatorError: If gate is not unitary or has the wrong size
        QubitIndexError: If targets are duplicated or out of range
    """
    targets = _check_targets(targets, state.num_qubits)
    gate = np.asarray(gate, dtype=np.complex128)
    side = 1 << len(targets)
    if gate.shape != (side, side):
        raise InvalidOperatorError(
            f"Gate of shape {gate.shape} does not act on {len(targets)} qubits",
            details={"expected": [side, side]},
        )
    deviation = float(np.max(np.abs(gate @ gate.conj().T - np.eye(side))))
    if deviation > settings.UNITARY_TOL:
        raise InvalidOperatorError(
            "Gate is not unitary", details={"max_deviation": deviation}
        )
    entries = _conjugate(state.entries, gate, targets, state.num_qubits)
    return DensityMatrix(entries, normalized=state.normalized)


def _psd_sqrt(element: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh((element + element.conj().T) / 2)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def apply_povm(
    state: DensityMatrix,
    povm: PovmElementSet,
    targets: Optional[Sequence[int]] = None,
) -> List[PovmOutcome]:
    """
    Measure a POVM, optionally on a subset of qubits.

    The update uses the principal square root of each element as its
    Kraus operator. Branches above BRANCH_PROB_FLOOR are renormalized;
    the others are returned unnormalized and tagged.

    Args:
        state: State to measure
        povm: Complete POVM (checked on construction)
        targets: Qubits the POVM acts on; all qubits when omitted

    Returns:
        One PovmOutcome per element, in POVM order

    Raises:
        QubitIndexError: If targets do not match the POVM size
    """
    if targets is None:
        targets = list(range(state.num_qubits))
    targets = _check_targets(targets, state.num_qubits)
    if len(targets) != povm.num_qubits:
        raise QubitIndexError(
            f"POVM acts on {povm.num_qubits} qubits, got {len(targets)} targets",
            details={"targets": targets},
        )

    outcomes: List[PovmOutcome] = []
    total = 0.0
    for label, element in zip(povm.labels, povm.elements):
        kraus = _psd_sqrt(element)
        post = _conjugate(state.entries, kraus, targets, state.num_qubits)
        probability = max(0.0, float(np.real(np.trace(post))))
        total += probability
        if probability > settings.BRANCH_PROB_FLOOR:
            outcomes.append(PovmOutcome(label, probability, DensityMatrix(post / probability)))
        else:
            outcomes.append(PovmOutcome(label, probability, DensityMatrix(post, normalized=False)))

    logger.debug("POVM with %d outcomes, total probability %.15f", len(outcomes), total)
    return outcomes


def computational_povm(num_qubits: int) -> PovmElementSet:
    """Projective measurement in the computational basis; labels are bitstrings."""
    dim = 1 << num_qubits
    elements = []
    labels = []
    for index in range(dim):
        projector = np.zeros((dim, dim), dtype=np.complex128)
        projector[index, index] = 1.0
        elements.append(projector)
        labels.append(format(index, f"0{num_qubits}b"))
    return PovmElementSet(tuple(elements), tuple(labels))


def x_basis_povm() -> PovmElementSet:
    """Single-qubit X measurement; label "0" is |+>, "1" is |->."""
    plus = SQRT_HALF * np.array([1, 1], dtype=np.complex128)
    minus = SQRT_HALF * np.array([1, -1], dtype=np.complex128)
    return PovmElementSet(
        (np.outer(plus, plus.conj()), np.outer(minus, minus.conj())),
        ("0", "1"),
    )


def bell_povm() -> PovmElementSet:
    """Two-qubit Bell measurement labelled by SwapLabel values."""
    labels = tuple(label.value for label in BELL_KETS)
    elements = tuple(np.outer(ket, ket.conj()) for ket in BELL_KETS.values())
    return PovmElementSet(elements, labels)


def procrustean_filter(alpha: float) -> PovmElementSet:
    """
    Local filter turning sqrt(alpha)|00> + sqrt(1-alpha)|11> into a singlet.

    The larger Schmidt weight is damped to the smaller one; success
    happens with probability 2 min(alpha, 1 - alpha).
    """
    alpha = require_probability("alpha", alpha)
    larger = max(alpha, 1.0 - alpha)
    damping = (1.0 - larger) / larger
    if alpha >= 0.5:
        success = np.diag([damping, 1.0]).astype(np.complex128)
    else:
        success = np.diag([1.0, damping]).astype(np.complex128)
    return PovmElementSet((success, I2 - success), ("success", "fail"))


def postselect(state: DensityMatrix, povm: PovmElementSet, label: str,
               targets: Optional[Sequence[int]] = None) -> PovmOutcome:
    """Single branch of apply_povm by label."""
    for outcome in apply_povm(state, povm, targets):
        if outcome.label == label:
            return outcome
    raise ParameterRangeError(f"Unknown POVM label {label!r}")


# =============================================================================
# Reduction and analysis
# =============================================================================


def partial_trace(state: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """
    Trace out every qubit not in `keep`.

    The kept qubits appear in the order given.

    Raises:
        QubitIndexError: If keep is empty, repeats a qubit or leaves the range
    """
    keep = _check_targets(list(keep), state.num_qubits)
    num_qubits = state.num_qubits
    tensor_ = state.entries.reshape((2,) * (2 * num_qubits))

    current = num_qubits
    for qubit in sorted(set(range(num_qubits)) - set(keep), reverse=True):
        tensor_ = np.trace(tensor_, axis1=qubit, axis2=qubit + current)
        current -= 1

    ordered = sorted(keep)
    permutation = [ordered.index(q) for q in keep]
    count = len(keep)
    tensor_ = tensor_.transpose(permutation + [p + count for p in permutation])
    dim = 1 << count
    return DensityMatrix(tensor_.reshape(dim, dim), normalized=state.normalized)


def _require_two_qubits(state: DensityMatrix) -> None:
    if state.num_qubits != 2:
        raise WrongQubitCountError(
            f"Expected a two-qubit state, got {state.num_qubits} qubits",
            details={"num_qubits": state.num_qubits},
        )


def _range_quadratic(state: DensityMatrix):
    """Eigen-system of the range and the coefficients of det(a*M1 + b*M2)."""
    values, vectors = np.linalg.eigh((state.entries + state.entries.conj().T) / 2)
    rank = int(np.sum(values > settings.PSD_TOL))
    if rank != 2:
        return values, vectors, rank, None
    m1 = vectors[:, -1].reshape(2, 2)
    m2 = vectors[:, -2].reshape(2, 2)
    c2 = np.linalg.det(m1)
    c0 = np.linalg.det(m2)
    c1 = m1[0, 0] * m2[1, 1] + m2[0, 0] * m1[1, 1] - m1[0, 1] * m2[1, 0] - m2[0, 1] * m1[1, 0]
    return values, vectors, rank, (c2, c1, c0)


def classify_two_qubit_range(state: DensityMatrix) -> RangeClass:
    """
    Count the product states in the range of a two-qubit state.

    Rank 2 ranges are classified by the projective roots of
    det(a*M1 + b*M2), where M1 and M2 are the range basis vectors
    reshaped to 2x2 coefficient matrices.

    Raises:
        WrongQubitCountError: If the state is not on two qubits
    """
    _require_two_qubits(state)
    _, _, rank, coefficients = _range_quadratic(state)
    if rank == 0:
        raise ParameterRangeError("The zero matrix has no range")
    if rank == 1:
        return RangeClass.PURE
    if rank > 2:
        return RangeClass.RANK_ABOVE_TWO

    c2, c1, c0 = coefficients
    scale = max(abs(c2), abs(c1), abs(c0))
    if scale < settings.DISCRIMINANT_TOL:
        return RangeClass.INFINITELY_MANY
    discriminant = c1 * c1 - 4.0 * c2 * c0
    if abs(discriminant) <= settings.DISCRIMINANT_TOL * scale * scale:
        return RangeClass.ONE
    return RangeClass.TWO


def singlet_fidelity(state: DensityMatrix) -> float:
    """Largest overlap of a two-qubit state with the four Bell states."""
    _require_two_qubits(state)
    overlaps = [
        float(np.real(ket.conj() @ state.entries @ ket)) for ket in BELL_KETS.values()
    ]
    return clip_unit(max(overlaps))


def schmidt_weight(state: DensityMatrix) -> float:
    """Largest eigenvalue of the reduced state of qubit 0 (the Schmidt weight if pure)."""
    _require_two_qubits(state)
    reduced = partial_trace(state, [0])
    return clip_unit(float(reduced.eigenvalues()[-1]))


def extract_pms_parameters(state: DensityMatrix) -> Pms:
    """
    Read (alpha, gamma, lambda) off a state with exactly one product state in its range.

    The product vector phi_A x phi_B is the double root of the range
    quadratic. Its weight is mu = 1/<phi|rho^+|phi>; the remainder is the
    pure part. Local unitaries sending phi_A to |0> and phi_B to |1>
    put the pure part in the sqrt(alpha)|00> + sqrt(gamma)|01> + ... form.

    Raises:
        ParameterRangeError: If the range does not hold exactly one product state
    """
    _require_two_qubits(state)
    if classify_two_qubit_range(state) is not RangeClass.ONE:
        raise ParameterRangeError("State range does not contain exactly one product state")

    values, vectors, _, (c2, c1, c0) = _range_quadratic(state)
    v1, v2 = vectors[:, -1], vectors[:, -2]
    if abs(c2) >= abs(c0):
        phi = (-c1 / (2.0 * c2)) * v1 + v2
    else:
        phi = v1 + (-c1 / (2.0 * c0)) * v2
    phi = phi / np.linalg.norm(phi)

    left, _, right = np.linalg.svd(phi.reshape(2, 2))
    phi_a = left[:, 0]
    phi_b = right[0, :]
    product = np.kron(phi_a, phi_b)

    inverse_weight = sum(
        abs(np.vdot(vectors[:, i], product)) ** 2 / values[i] for i in (-1, -2)
    )
    mu = 1.0 / inverse_weight
    remainder = state.entries - mu * np.outer(product, product.conj())
    rem_values, rem_vectors = np.linalg.eigh((remainder + remainder.conj().T) / 2)
    lam = float(np.real(np.trace(remainder))) / state.trace()
    psi = rem_vectors[:, -1]

    u_a = np.array([[np.conj(phi_a[0]), np.conj(phi_a[1])], [-phi_a[1], phi_a[0]]])
    u_b = np.array([[-phi_b[1], phi_b[0]], [np.conj(phi_b[0]), np.conj(phi_b[1])]])
    weights = np.abs(np.kron(u_a, u_b) @ psi) ** 2
    weights = weights / weights.sum()
    logger.debug("Extracted mu=%.12f, |10> leakage %.3e", mu, weights[2])

    alpha = clip_unit(weights[0])
    gamma = clip_unit(min(weights[1], 1.0 - alpha))
    return Pms(alpha=alpha, gamma=gamma, lam=clip_unit(lam))
