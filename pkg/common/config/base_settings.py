"""
Base settings class for environment configuration.

Uses Pydantic Settings for automatic environment variable loading.
Every variable carries the ENTPERC_ prefix, so THREADS is read from
ENTPERC_THREADS. Extend this class for application-specific settings.

Example:
    from common.config import BaseAppSettings

    class Settings(BaseAppSettings):
        # App-specific settings
        MAX_QUBITS: int = 10

    settings = Settings()
    print(settings.THREADS)
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class BaseAppSettings(BaseSettings):
    """
    Base settings class with common configuration options.

    Automatically loads values from ENTPERC_* environment variables
    and an optional .env file.
    """

    # ==========================================================================
    # Worker Pool Settings
    # ==========================================================================
    THREADS: int = 1  # worker processes for Monte Carlo trials

    # ==========================================================================
    # Logging Settings
    # ==========================================================================
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
    LOG_DATEFMT: str = "%Y-%m-%d %H:%M:%S"

    # ==========================================================================
    # Runtime Settings
    # ==========================================================================
    ENVIRONMENT: str = "development"  # development, ci, production

    # ==========================================================================
    # Pydantic Settings Configuration
    # ==========================================================================
    model_config = SettingsConfigDict(
        env_prefix="ENTPERC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=True,
    )

    def is_production(self) -> bool:
        """Check if running in production environment."""
        return self.ENVIRONMENT.lower() == "production"

    def is_development(self) -> bool:
        """Check if running in development environment."""
        return self.ENVIRONMENT.lower() == "development"

    def resolve_workers(self, override: int | None = None) -> int:
        """
        Pick the worker pool size.

        Args:
            override: Value from the --workers flag, if given

        Returns:
            The flag value when set, otherwise THREADS
        """
        if override is not None:
            return max(1, override)
        return max(1, self.THREADS)

    def validate_required(self) -> None:
        """
        Validate that settings are usable.

        Raises:
            ValueError: If any setting is out of range
        """
        errors = []

        if self.THREADS < 1:
            errors.append("THREADS must be at least 1")

        if self.LOG_LEVEL.upper() not in LOG_LEVELS:
            errors.append(f"LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")

        if errors:
            raise ValueError("Configuration errors:\n- " + "\n- ".join(errors))
