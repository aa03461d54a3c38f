"""
Utilities module - Output helpers, exceptions, random streams and worker pool.
"""

from common.utils.responses import (
    success_response,
    error_response,
    run_metadata,
    write_table,
)
from common.utils.exceptions import (
    EntpercError,
    ParameterRangeError,
    InvalidOperatorError,
    QubitIndexError,
    ResourceCapError,
    WrongQubitCountError,
    UnsupportedGeometryError,
    BrokenPathError,
    InconsistentTraceError,
    ConfigValidationError,
    OutputPathError,
    AcceptanceError,
)
from common.utils.streams import fnv1a_64, stream_rng
from common.utils.pool import batch_ranges, merge_sums, run_batches

__all__ = [
    "success_response",
    "error_response",
    "run_metadata",
    "write_table",
    "EntpercError",
    "ParameterRangeError",
    "InvalidOperatorError",
    "QubitIndexError",
    "ResourceCapError",
    "WrongQubitCountError",
    "UnsupportedGeometryError",
    "BrokenPathError",
    "InconsistentTraceError",
    "ConfigValidationError",
    "OutputPathError",
    "AcceptanceError",
    "fnv1a_64",
    "stream_rng",
    "batch_ranges",
    "run_batches",
    "merge_sums",
]
