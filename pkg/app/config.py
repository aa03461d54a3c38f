"""
entperc application settings.

Extends the base settings with the numerical tolerances and caps shared
by the simulation services.
"""

from common.config import BaseAppSettings


class Settings(BaseAppSettings):
    """entperc-specific settings."""

    # ==========================================================================
    # Release
    # ==========================================================================
    VERSION: str = "0.1.0"
    SCHEMA_VERSION: int = 1

    # ==========================================================================
    # Density-Matrix Oracle
    # ==========================================================================
    MAX_QUBITS: int = 10

    HERMITIAN_TOL: float = 1e-12
    TRACE_TOL: float = 1e-12
    UNITARY_TOL: float = 1e-12
    PSD_TOL: float = 1e-10
    POVM_TOL: float = 1e-10

    # Relative tolerance of the discriminant in the range classifier
    DISCRIMINANT_TOL: float = 1e-9

    # Post-states are renormalized only above this branch probability
    BRANCH_PROB_FLOOR: float = 1e-12

    # ==========================================================================
    # Monte Carlo
    # ==========================================================================
    # Trials per worker task; fixed so results do not depend on pool size
    TRIAL_BATCH: int = 64

    def validate_required(self) -> None:
        """
        Validate base and oracle settings together.

        Raises:
            ValueError: If any setting is out of range
        """
        errors = []
        try:
            super().validate_required()
        except ValueError as exc:
            errors.extend(
                line[2:] for line in str(exc).splitlines() if line.startswith("- ")
            )

        if not 1 <= self.MAX_QUBITS <= 12:
            errors.append("MAX_QUBITS must lie in 1..12")

        if self.TRIAL_BATCH < 1:
            errors.append("TRIAL_BATCH must be at least 1")

        if errors:
            raise ValueError("Configuration errors:\n- " + "\n- ".join(errors))


# Global settings instance
settings = Settings()
