"""
Argument checks shared by the services.
"""

import math

from common.utils.exceptions import ParameterRangeError


def require_probability(name: str, value: float) -> float:
    """
    Check that value is a finite number in [0, 1].

    Raises:
        ParameterRangeError: Naming the parameter and the violated range
    """
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise ParameterRangeError(
            f"{name} must lie in [0, 1] (got {value!r})",
            details={name: value},
        )
    return value


def require_simplex(alpha: float, gamma: float, slack: float = 1e-12) -> None:
    """
    Check alpha + gamma <= 1.

    Raises:
        ParameterRangeError: If the pure part would have negative |11> weight
    """
    if alpha + gamma > 1.0 + slack:
        raise ParameterRangeError(
            f"alpha + gamma must not exceed 1 (got {alpha + gamma!r})",
            details={"alpha": alpha, "gamma": gamma},
        )


def require_min(name: str, value: int, minimum: int) -> int:
    """Check an integer lower bound."""
    if value < minimum:
        raise ParameterRangeError(
            f"{name} must be at least {minimum} (got {value})",
            details={name: value},
        )
    return value


def clip_unit(value: float) -> float:
    """Clamp round-off excursions back into [0, 1]."""
    return min(1.0, max(0.0, float(value)))
