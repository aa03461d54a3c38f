import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.models.distillation import RecyclingState, Scheme
from app.services import distillation
from app.services import quantum_core as qc
from common.utils.exceptions import ParameterRangeError


# =============================================================================
# DSS
# =============================================================================


@pytest.mark.parametrize("alpha, lam", [(0.5, 1.0), (0.6, 0.8), (0.9, 0.3)])
def test_dss_two_and_three_copies(alpha, lam):
    base = lam * lam * alpha * (1.0 - alpha)
    assert distillation.dss_success_prob(2, alpha, lam) == pytest.approx(2.0 * base)
    assert distillation.dss_success_prob(3, alpha, lam) == pytest.approx(3.0 * base)


def test_dss_needs_two_copies():
    with pytest.raises(ParameterRangeError):
        distillation.dss_success_prob(1, 0.5, 1.0)


def test_dss_measurement_size_cap():
    with pytest.raises(ParameterRangeError, match="2..4"):
        distillation.dss_build_measurement(5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dss_pairs_are_cross_term_free(n):
    measurement = distillation.dss_build_measurement(n)
    assert measurement.pairs
    for _, a, b in measurement.pairs.values():
        assert distillation.cross_term_free(n, a, b)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dss_eigensystem_reassembles_copies(n):
    alpha, lam = 0.7, 0.6
    edge = qc.build_pms(alpha, 0.0, lam)
    expected = qc.tensor(*([edge] * n)).entries
    rebuilt = sum(
        value * np.outer(vector, vector.conj())
        for value, vector in distillation.dss_eigensystem(n, alpha, lam)
    )
    assert_allclose(rebuilt, expected, atol=1e-12)


@pytest.mark.parametrize("n, alpha, lam", [(2, 0.6, 0.9), (3, 0.7, 0.8), (4, 0.5, 0.9)])
def test_dss_oracle_matches_closed_form(n, alpha, lam):
    simulation = distillation.dss_simulate(n, alpha, lam, seed=3, shots=1000)
    assert simulation.exact_probability == pytest.approx(
        distillation.dss_success_prob(n, alpha, lam), abs=1e-10
    )
    assert simulation.min_fidelity == pytest.approx(1.0, abs=1e-10)


@pytest.mark.slow
def test_dss_four_copies_monte_carlo_within_three_sigma():
    simulation = distillation.dss_simulate(4, 0.5, 0.9, seed=11, shots=100_000)
    closed = distillation.dss_success_prob(4, 0.5, 0.9)
    sigma = math.sqrt(closed * (1.0 - closed) / simulation.shots)
    assert abs(simulation.frequency - closed) < 3.0 * sigma


# =============================================================================
# Recycling
# =============================================================================


def test_recycle_update_fixed_point():
    state = distillation.recycle_update(RecyclingState(alpha_k=0.5, lambda_k=1.0))
    assert state.alpha_k == pytest.approx(0.5)
    assert state.lambda_k == pytest.approx(1.0)
    assert state.level == 1


def test_recycle_update_matches_pcm_recycled_branch():
    from app.models.states import Pms
    from app.services import protocols

    edge = Pms(alpha=0.7, gamma=0.0, lam=0.9)
    recycled = protocols.pcm_branches(edge, edge).recycled
    state = distillation.recycle_update(RecyclingState(alpha_k=0.7, lambda_k=0.9))
    assert state.alpha_k == pytest.approx(recycled.alpha)
    assert state.lambda_k == pytest.approx(recycled.lam)


def test_branch_probs_sum_to_one():
    probs = distillation.recycling_branch_probs(RecyclingState(alpha_k=0.7, lambda_k=0.9))
    assert probs.c + probs.f + probs.s == pytest.approx(1.0)


@pytest.mark.parametrize("n", [0, 1])
def test_recycling_without_pairs(n):
    assert distillation.recycling_fail_prob(n, 0.5, 1.0) == 1.0
    assert distillation.recycling_scp(n, 0.5, 1.0) == 0.0


def test_recycling_four_singlet_copies():
    assert distillation.recycling_fail_prob(4, 0.5, 1.0) == pytest.approx(1 / 8)
    assert distillation.recycling_scp(4, 0.5, 1.0) == pytest.approx(7 / 8)


def test_recycling_two_copies_is_scp_pair():
    assert distillation.recycling_scp(2, 0.7, 0.9) == pytest.approx(2 * 0.81 * 0.7 * 0.3)


def test_recycling_is_monotone_in_copies():
    values = [distillation.recycling_scp(n, 0.6, 0.9) for n in (2, 4, 6, 8)]
    assert values == sorted(values)


def test_recycling_without_pure_part():
    assert distillation.recycling_scp(6, 0.6, 0.0) == 0.0


# =============================================================================
# Three-state recycling and dispatch
# =============================================================================


def test_three_state_single_group_success():
    estimate = distillation.recycling_scp_three(3, 0.5, 1.0, seed=5, trials=2000)
    sigma = math.sqrt(0.75 * 0.25 / estimate.trials)
    assert abs(estimate.p_hat - 0.75) < 5 * sigma


def test_three_state_is_reproducible_across_workers():
    single = distillation.recycling_scp_three(6, 0.6, 0.9, seed=2, trials=200, workers=1)
    pooled = distillation.recycling_scp_three(6, 0.6, 0.9, seed=2, trials=200, workers=2)
    assert single.p_hat == pooled.p_hat


def test_three_state_needs_three_copies():
    with pytest.raises(ParameterRangeError):
        distillation.recycling_scp_three(2, 0.5, 1.0, seed=0, trials=10)


def test_three_state_without_pure_part():
    estimate = distillation.recycling_scp_three(3, 0.5, 0.0, seed=0, trials=50)
    assert estimate.p_hat == 0.0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_auto_scheme_takes_the_better(n):
    auto = distillation.scp(n, 0.6, 0.9, Scheme.AUTO)
    recycling = distillation.scp(n, 0.6, 0.9, Scheme.RECYCLING)
    dss = distillation.scp(n, 0.6, 0.9, Scheme.DSS)
    assert auto == pytest.approx(max(recycling, dss))


def test_auto_prefers_dss_at_three_copies():
    assert distillation.scp(3, 0.5, 1.0, Scheme.AUTO) == pytest.approx(0.75)
