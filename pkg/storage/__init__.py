"""Storage module for configuration files, datasets and reports."""

from .config_loader import apply_overrides, build_config, config_hash, load_config, validate_config_data
from .datasets import read_report, read_runs, read_table, write_records, write_report, write_runs, write_table

__all__ = [
    "apply_overrides",
    "build_config",
    "config_hash",
    "load_config",
    "read_report",
    "read_runs",
    "read_table",
    "validate_config_data",
    "write_records",
    "write_report",
    "write_runs",
    "write_table",
]
