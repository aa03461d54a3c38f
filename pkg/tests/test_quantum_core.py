import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.models.quantum import DensityMatrix, PovmElementSet, RangeClass
from app.models.states import SwapLabel
from app.services import quantum_core as qc
from common.utils.exceptions import (
    InvalidOperatorError,
    ParameterRangeError,
    QubitIndexError,
    ResourceCapError,
    WrongQubitCountError,
)


def _ket(*amplitudes):
    return DensityMatrix(np.outer(amplitudes, np.conj(amplitudes)).astype(np.complex128))


def _basis(bits: str) -> DensityMatrix:
    vector = np.zeros(1 << len(bits), dtype=np.complex128)
    vector[int(bits, 2)] = 1.0
    return _ket(*vector)


# =============================================================================
# build_pms
# =============================================================================


def test_build_pms_pure_product_limit():
    assert_allclose(qc.build_pms(1.0, 0.0, 1.0).entries, _basis("00").entries, atol=1e-15)


def test_build_pms_singlet_limit():
    expected = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_PLUS))
    assert_allclose(qc.build_pms(0.5, 0.0, 1.0).entries, expected.entries, atol=1e-15)


def test_build_pms_half_mixture_spectrum():
    state = qc.build_pms(0.5, 0.0, 0.5)
    assert_allclose(state.eigenvalues(), [0.0, 0.0, 0.5, 0.5], atol=1e-12)
    assert state.entries[1, 1] == pytest.approx(0.5)


def test_build_pms_random_draws_are_valid():
    rng = np.random.default_rng(11)
    for _ in range(200):
        alpha = rng.random()
        gamma = rng.random() * (1.0 - alpha)
        state = qc.build_pms(alpha, gamma, rng.random())
        state.validate()
        assert state.trace() == pytest.approx(1.0)


@pytest.mark.parametrize(
    "alpha, gamma, lam",
    [(-0.1, 0.0, 0.5), (0.5, 0.0, 1.5), (0.7, 0.4, 0.5)],
)
def test_build_pms_rejects_out_of_range(alpha, gamma, lam):
    with pytest.raises(ParameterRangeError):
        qc.build_pms(alpha, gamma, lam)


# =============================================================================
# Gates and measurements
# =============================================================================


def test_identity_gate_leaves_state_unchanged():
    state = qc.build_pms(0.7, 0.1, 0.8)
    result = qc.apply_gate(state, np.eye(4), [0, 1])
    assert_allclose(result.entries, state.entries, atol=1e-15)


def test_cnot_twice_is_identity():
    state = qc.build_pms(0.6, 0.2, 0.9)
    once = qc.apply_gate(state, qc.CNOT, [0, 1])
    twice = qc.apply_gate(once, qc.CNOT, [0, 1])
    assert_allclose(twice.entries, state.entries, atol=1e-14)


def test_cnot_truth_table():
    result = qc.apply_gate(_basis("10"), qc.CNOT, [0, 1])
    assert_allclose(result.entries, _basis("11").entries, atol=1e-15)


def test_cnot_on_reversed_targets():
    result = qc.apply_gate(_basis("01"), qc.CNOT, [1, 0])
    assert_allclose(result.entries, _basis("11").entries, atol=1e-15)


def test_non_unitary_gate_rejected():
    with pytest.raises(InvalidOperatorError, match="not unitary"):
        qc.apply_gate(_basis("00"), np.diag([1.0, 0.5, 1.0, 1.0]), [0, 1])


@pytest.mark.parametrize("targets", [[0, 0], [0, 2], []])
def test_bad_targets_rejected(targets):
    with pytest.raises(QubitIndexError):
        qc.apply_gate(_basis("00"), np.eye(1 << max(1, len(targets))), targets)


def test_computational_measurement_of_basis_state():
    outcomes = qc.apply_povm(_basis("00"), qc.computational_povm(2))
    probabilities = {o.label: o.probability for o in outcomes}
    assert probabilities["00"] == pytest.approx(1.0)
    assert sum(probabilities.values()) == pytest.approx(1.0, abs=1e-10)


def test_uniform_povm_keeps_state():
    povm = PovmElementSet((np.eye(2) / 2, np.eye(2) / 2), ("a", "b"))
    state = qc.partial_trace(qc.build_pms(0.7, 0.0, 0.6), [0])
    for outcome in qc.apply_povm(state, povm):
        assert outcome.probability == pytest.approx(0.5)
        assert_allclose(outcome.state.entries, state.entries, atol=1e-12)


def test_incomplete_povm_rejected():
    with pytest.raises(InvalidOperatorError):
        PovmElementSet((np.diag([1.0, 0.0]),), ("only",))


def test_bell_povm_probabilities_sum_to_one():
    state = qc.tensor(qc.build_pms(0.7, 0.1, 0.8), qc.build_pms(0.6, 0.0, 0.9))
    outcomes = qc.apply_povm(state, qc.bell_povm(), [1, 2])
    assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-10)


def test_qubit_cap_enforced():
    with pytest.raises(ResourceCapError):
        DensityMatrix(np.eye(1 << 11) / (1 << 11))


# =============================================================================
# Partial trace
# =============================================================================


def test_trace_out_product_state():
    reduced = qc.partial_trace(_basis("00"), [0])
    assert_allclose(reduced.entries, np.diag([1.0, 0.0]), atol=1e-15)


def test_trace_out_singlet_gives_maximally_mixed():
    singlet = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_MINUS))
    assert_allclose(qc.partial_trace(singlet, [1]).entries, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_keeps_requested_order():
    state = qc.tensor(_basis("0"), _basis("1"))
    swapped = qc.partial_trace(state, [1, 0])
    assert_allclose(swapped.entries, _basis("10").entries, atol=1e-15)


def test_w_class_reduction_has_one_product_state():
    lam = 0.6
    vector = np.zeros(8, dtype=np.complex128)
    # sqrt(lam)|Phi>|1> + sqrt(1-lam)|00>|0>, Phi = (|01> + |10>)/sqrt2
    vector[0b011] = np.sqrt(lam / 2)
    vector[0b101] = np.sqrt(lam / 2)
    vector[0b000] = np.sqrt(1 - lam)
    reduced = qc.partial_trace(_ket(*vector), [0, 1])
    assert qc.classify_two_qubit_range(reduced) is RangeClass.ONE


# =============================================================================
# Range classification
# =============================================================================


def test_classifier_pms_has_one_product_state():
    assert qc.classify_two_qubit_range(qc.build_pms(0.7, 0.0, 0.6)) is RangeClass.ONE


def test_classifier_product_mixture():
    state = DensityMatrix(np.diag([0.5, 0.5, 0.0, 0.0]).astype(np.complex128))
    assert qc.classify_two_qubit_range(state) is RangeClass.INFINITELY_MANY


def test_classifier_bell_mixture():
    plus = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_PLUS)).entries
    minus = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_MINUS)).entries
    state = DensityMatrix((plus + minus) / 2)
    assert qc.classify_two_qubit_range(state) is RangeClass.TWO


def test_classifier_pure_and_full_rank():
    assert qc.classify_two_qubit_range(_basis("01")) is RangeClass.PURE
    full = DensityMatrix(np.eye(4, dtype=np.complex128) / 4)
    assert qc.classify_two_qubit_range(full) is RangeClass.RANK_ABOVE_TWO


def test_classifier_grid_of_pms_states():
    for alpha in np.linspace(0.05, 0.95, 7):
        for gamma_share in (0.0, 0.3, 0.6):
            gamma = gamma_share * (1.0 - alpha)
            for lam in (0.2, 0.5, 0.8):
                state = qc.build_pms(alpha, gamma, lam)
                assert qc.classify_two_qubit_range(state) is RangeClass.ONE


def test_classifier_needs_two_qubits():
    with pytest.raises(WrongQubitCountError):
        qc.classify_two_qubit_range(_basis("0"))


# =============================================================================
# Read-outs
# =============================================================================


def test_singlet_fidelity_examples():
    singlet = qc.ket_to_density(qc.bell_state(SwapLabel.PHI_MINUS))
    assert qc.singlet_fidelity(singlet) == pytest.approx(1.0)
    assert qc.singlet_fidelity(_basis("00")) == pytest.approx(0.5)


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.9])
def test_singlet_fidelity_of_half_pms(lam):
    # Psi+ overlap lam, Phi+- overlaps (1 - lam)/2
    expected = max(lam, (1.0 - lam) / 2.0)
    assert qc.singlet_fidelity(qc.build_pms(0.5, 0.0, lam)) == pytest.approx(expected)


def test_schmidt_weight_of_pure_state():
    assert qc.schmidt_weight(qc.pure_schmidt_state(0.3)) == pytest.approx(0.7)


@pytest.mark.parametrize("alpha, gamma, lam", [(0.7, 0.0, 0.6), (0.5, 0.2, 0.8), (0.3, 0.1, 0.4)])
def test_extract_pms_parameters_round_trip(alpha, gamma, lam):
    params = qc.extract_pms_parameters(qc.build_pms(alpha, gamma, lam))
    assert params.alpha == pytest.approx(alpha, abs=1e-8)
    assert params.gamma == pytest.approx(gamma, abs=1e-8)
    assert params.lam == pytest.approx(lam, abs=1e-8)


def test_extract_rejects_two_product_states():
    plus = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_PLUS)).entries
    minus = qc.ket_to_density(qc.bell_state(SwapLabel.PSI_MINUS)).entries
    with pytest.raises(ParameterRangeError):
        qc.extract_pms_parameters(DensityMatrix((plus + minus) / 2))


@pytest.mark.parametrize("alpha", [0.75, 0.3])
def test_procrustean_filter_success_probability(alpha):
    outcomes = qc.apply_povm(qc.pure_schmidt_state(alpha), qc.procrustean_filter(alpha), [0])
    success = next(o for o in outcomes if o.label == "success")
    assert success.probability == pytest.approx(2.0 * min(alpha, 1.0 - alpha))
    assert qc.singlet_fidelity(success.state) == pytest.approx(1.0)
