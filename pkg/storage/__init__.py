"""Storage module for run reports and the run log."""

from .reports import (
    RunReport,
    atomic_write_bytes,
    atomic_write_text,
    dumps,
    rows_to_csv,
    write_csv,
    write_report,
)
from .runs import RunEntry, RunLog


def create_run_log_from_config(config):
    """Run log at the configured path, or None when logging is disabled."""
    if not config.RUN_LOG_ENABLED:
        return None
    return RunLog(config.RUN_LOG_DB_PATH)


__all__ = [
    "RunReport",
    "atomic_write_bytes",
    "atomic_write_text",
    "dumps",
    "rows_to_csv",
    "write_csv",
    "write_report",
    "RunEntry",
    "RunLog",
    "create_run_log_from_config",
]
