# hexinject - Logging Infrastructure
# Structured JSON logging for engines and the CLI

from .logger import (
    setup_logger,
    log_event,
    log_run_event,
    log_engine_failure,
    StructuredJSONFormatter,
    FAILURE_LOGGER,
)

from .validation import (
    validate_log_format,
    enforce_timestamp_format,
    sanitize_context,
    VALID_STATUSES,
)

__all__ = [
    "setup_logger",
    "log_event",
    "log_run_event",
    "log_engine_failure",
    "StructuredJSONFormatter",
    "FAILURE_LOGGER",
    "validate_log_format",
    "enforce_timestamp_format",
    "sanitize_context",
    "VALID_STATUSES",
]
