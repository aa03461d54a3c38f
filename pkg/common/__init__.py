"""
Common library for reusable infrastructure components.

Nothing in here knows about quantum states; the modules can be reused
by any simulation project:

- utils: Output envelopes and tables, exceptions, seeded random streams, worker pool
- config: Base settings class
"""

from common.utils import (
    success_response,
    error_response,
    run_metadata,
    write_table,
    EntpercError,
    ParameterRangeError,
    ConfigValidationError,
    AcceptanceError,
    stream_rng,
    run_batches,
)
from common.config import BaseAppSettings

__all__ = [
    # Utils
    "success_response",
    "error_response",
    "run_metadata",
    "write_table",
    "EntpercError",
    "ParameterRangeError",
    "ConfigValidationError",
    "AcceptanceError",
    "stream_rng",
    "run_batches",
    # Config
    "BaseAppSettings",
]
