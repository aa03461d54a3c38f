"""
Closed-form two-bond protocols.

Pure state conversion measurement (PCM), Procrustean filtering,
entanglement swapping of mixed, pure and XZ kind, and the
majorization-based pure conversions. Every function is pure and works
on the parameter models of app.models.states.

Example:
    from app.models.states import Pms
    from app.services import protocols

    s1 = Pms(alpha=0.7, lam=0.9)
    s2 = Pms(alpha=0.5, lam=0.8)
    result = protocols.pcm(s1, s2)
    print(result.success_prob, result.result.alpha)
    print(protocols.scp_pair(s1, s2))
"""

import logging
import math
from typing import List

from app.models.states import (
    PcmBranches,
    PcmResult,
    Pms,
    PureSchmidt,
    PureSwapOutcome,
    SwapLabel,
    SwapOutcome,
)
from app.services.guards import clip_unit
from common.utils.exceptions import ParameterRangeError


logger = logging.getLogger(__name__)

# Two pure inputs count as equal for XZ-swapping within this distance
EQUAL_ALPHA_TOL = 1e-12


def canonicalize(state: PureSchmidt) -> PureSchmidt:
    """Flip to the representative with alpha >= 1/2."""
    return PureSchmidt(alpha=max(state.alpha, 1.0 - state.alpha))


# =============================================================================
# Conversion measurement
# =============================================================================


def _pcm_weights(state1: Pms, state2: Pms) -> tuple[float, float]:
    """alpha(1-beta-delta) and beta(1-alpha-gamma)."""
    return state1.alpha * state2.beta_weight, state2.alpha * state1.beta_weight


def pcm(state1: Pms, state2: Pms) -> PcmResult:
    """
    Success branch of the PCM: CNOTs from state1 onto state2, then outcome "11".

    Args:
        state1: Edge whose qubits are kept
        state2: Edge whose qubits are measured

    Returns:
        PcmResult with p_c and the smaller Schmidt weight alpha' of the
        pure output; `degenerate` is set when both weights vanish
    """
    first, second = _pcm_weights(state1, state2)
    total = first + second
    if total <= 0.0:
        return PcmResult(success_prob=0.0, result=None, degenerate=True)
    success = clip_unit(state1.lam * state2.lam * total)
    return PcmResult(
        success_prob=success,
        result=PureSchmidt(alpha=clip_unit(min(first, second) / total)),
    )


def pcm_branches(state1: Pms, state2: Pms) -> PcmBranches:
    """
    All outcome classes of the PCM.

    "11" leaves a pure state, "00" leaves a new three-parameter state
    on the kept qubits, "01" and "10" leave nothing usable.
    """
    lam, nu = state1.lam, state2.lam
    success = pcm(state1, state2)

    overlap = (
        state1.alpha * state2.alpha
        + state1.gamma * state2.gamma
        + state1.beta_weight * state2.beta_weight
    )
    noise = (1.0 - lam) * (nu * state2.gamma + 1.0 - nu) + lam * state1.gamma * (1.0 - nu)
    recycle = clip_unit(lam * nu * overlap + noise)

    recycled = None
    if recycle > 0.0:
        if overlap > 0.0:
            recycled = Pms(
                alpha=clip_unit(state1.alpha * state2.alpha / overlap),
                gamma=clip_unit(state1.gamma * state2.gamma / overlap),
                lam=clip_unit(lam * nu * overlap / recycle),
            )
        else:
            recycled = Pms(alpha=1.0, gamma=0.0, lam=0.0)

    fail = clip_unit(1.0 - success.success_prob - recycle)
    return PcmBranches(
        success=success.success_prob,
        recycle=recycle,
        fail=fail,
        pure=success.result,
        recycled=recycled,
    )


def procrustean_prob(state: PureSchmidt) -> float:
    """Probability 2 min(alpha, 1 - alpha) of filtering a pure state into a singlet."""
    return 2.0 * state.smaller_weight


def scp_pair(state1: Pms, state2: Pms) -> float:
    """
    Singlet conversion probability of two edges: PCM followed by filtering.

    Equals 2 lam nu min[alpha(1-beta-delta), beta(1-alpha-gamma)].
    """
    first, second = _pcm_weights(state1, state2)
    return clip_unit(2.0 * state1.lam * state2.lam * min(first, second))


# =============================================================================
# Entanglement swapping
# =============================================================================


def _psi_parts(state1: Pms, state2: Pms, sign: int) -> tuple[float, float]:
    """h and the |01> amplitude squared for the Psi outcome of given sign."""
    cross = (
        math.sqrt(state1.alpha * state2.gamma)
        + sign * math.sqrt(state1.gamma * state2.beta_weight)
    ) ** 2
    h = state1.alpha * state2.alpha + state1.beta_weight * state2.beta_weight + cross
    return h, cross


def _phi_g(state1: Pms, state2: Pms, sign: int) -> float:
    cross = (
        math.sqrt(state1.gamma * state2.gamma)
        + sign * math.sqrt(state1.alpha * state2.beta_weight)
    ) ** 2
    return (
        state1.gamma * state2.alpha
        + state1.beta_weight * state2.gamma
        + state1.beta_weight * state2.alpha
        + cross
    )


def swap_pms(state1: Pms, state2: Pms) -> List[SwapOutcome]:
    """
    Bell measurement at the shared node of two three-parameter edges.

    Args:
        state1: Edge (C1, C2)
        state2: Edge (C2, C3)

    Returns:
        Four outcomes in the order PsiPlus, PsiMinus, PhiPlus, PhiMinus.
        Psi outcomes carry the new edge (C1, C3); Phi outcomes are
        unusable since the state leaves the family.
    """
    lam, nu = state1.lam, state2.lam
    outcomes: List[SwapOutcome] = []

    for label, sign in ((SwapLabel.PSI_PLUS, 1), (SwapLabel.PSI_MINUS, -1)):
        h, cross = _psi_parts(state1, state2, sign)
        probability = 0.5 * (
            h * lam * nu
            + state2.beta_weight * (1.0 - lam) * nu
            + state1.alpha * lam * (1.0 - nu)
        )
        result = None
        if probability > 0.0 and h > 0.0:
            result = Pms(
                alpha=clip_unit(state1.alpha * state2.alpha / h),
                gamma=clip_unit(cross / h),
                lam=clip_unit(lam * nu * h / (2.0 * probability)),
            )
        outcomes.append(SwapOutcome(label=label, probability=clip_unit(probability), result=result))

    for label, sign in ((SwapLabel.PHI_PLUS, 1), (SwapLabel.PHI_MINUS, -1)):
        g = _phi_g(state1, state2, sign)
        probability = 0.5 * (
            g * lam * nu
            + (1.0 - nu) * (1.0 - state1.alpha * lam)
            + (state2.alpha + state2.gamma) * (1.0 - lam) * nu
        )
        outcomes.append(SwapOutcome(label=label, probability=clip_unit(probability)))

    return outcomes


def _require_purifiable(*states: Pms) -> None:
    for state in states:
        if state.gamma != 0.0:
            raise ParameterRangeError(
                "Special swapping needs gamma = 0 on both edges",
                details={"gamma": state.gamma},
            )


def swap_pms_special(state1: Pms, state2: Pms) -> Pms:
    """
    Swap two purifiable edges, replacing Phi outcomes by |01>.

    Both Psi outcomes give the same state after a local phase
    correction, so the result is rho(alpha beta / h, 0, lam nu h)
    with h = alpha beta + (1 - alpha)(1 - beta).

    Raises:
        ParameterRangeError: If either gamma is nonzero
    """
    _require_purifiable(state1, state2)
    alpha, beta = state1.alpha, state2.alpha
    h = alpha * beta + (1.0 - alpha) * (1.0 - beta)
    if h <= 0.0:
        # Orthogonal product inputs: only the |01> component survives
        return Pms(alpha=1.0, gamma=0.0, lam=0.0)
    return Pms(
        alpha=clip_unit(alpha * beta / h),
        gamma=0.0,
        lam=clip_unit(state1.lam * state2.lam * h),
    )


def swap_pure(state1: PureSchmidt, state2: PureSchmidt) -> List[PureSwapOutcome]:
    """
    Swap two pure states; every outcome keeps a pure state.

    The alpha of each outcome is the larger Schmidt weight after local
    corrections. Zero-probability outcomes are omitted.
    """
    alpha, beta = state1.alpha, state2.alpha
    same = (alpha * beta, (1.0 - alpha) * (1.0 - beta))
    crossed = (alpha * (1.0 - beta), (1.0 - alpha) * beta)

    outcomes: List[PureSwapOutcome] = []
    for labels, (x, y) in (
        ((SwapLabel.PSI_PLUS, SwapLabel.PSI_MINUS), same),
        ((SwapLabel.PHI_PLUS, SwapLabel.PHI_MINUS), crossed),
    ):
        total = x + y
        if total <= 0.0:
            continue
        result = PureSchmidt(alpha=clip_unit(max(x, y) / total))
        for label in labels:
            outcomes.append(
                PureSwapOutcome(label=label, probability=clip_unit(total / 2.0), result=result)
            )
    return outcomes


def pure_swap_average(state1: PureSchmidt, state2: PureSchmidt) -> float:
    """
    Swap then filter: sum over outcomes of p_m 2 min(alpha_m, 1 - alpha_m).

    Equals 2 min(1 - alpha, 1 - beta) for canonical inputs.
    """
    return clip_unit(
        sum(o.probability * procrustean_prob(o.result) for o in swap_pure(state1, state2))
    )


def xz_alpha(alpha_hat: float) -> float:
    """Schmidt weight left by XZ-swapping two copies of |alpha_hat>."""
    product = alpha_hat * (1.0 - alpha_hat)
    return clip_unit((1.0 + math.sqrt(max(0.0, 1.0 - 16.0 * product * product))) / 2.0)


def xz_swap(state1: PureSchmidt, state2: PureSchmidt) -> PureSchmidt:
    """
    XZ-swapping of two equal pure states: one qubit of the Bell
    measurement is read in the X basis. All four outcomes have
    probability 1/4 and leave the same Schmidt weight.

    Raises:
        ParameterRangeError: If the two inputs differ
    """
    if abs(state1.alpha - state2.alpha) > EQUAL_ALPHA_TOL:
        raise ParameterRangeError(
            "XZ-swapping needs equal inputs",
            details={"alpha": state1.alpha, "beta": state2.alpha},
        )
    return PureSchmidt(alpha=xz_alpha(state1.alpha))


# =============================================================================
# Majorization
# =============================================================================


def majorization_pair_prob(state1: PureSchmidt, state2: PureSchmidt) -> float:
    """Optimal probability min(1, 2(1 - alpha beta)) of a singlet from two pure states."""
    alpha = canonicalize(state1).alpha
    beta = canonicalize(state2).alpha
    return clip_unit(min(1.0, 2.0 * (1.0 - alpha * beta)))


def concentrate_bond(state1: PureSchmidt, state2: PureSchmidt) -> PureSchmidt:
    """Deterministically merge two parallel pure edges into |max(1/2, alpha beta)>."""
    alpha = canonicalize(state1).alpha
    beta = canonicalize(state2).alpha
    return PureSchmidt(alpha=max(0.5, alpha * beta))
