"""Experiment orchestration: config files, runners, trace audits, reports."""

from .config import ConfigError, ExperimentConfig, load_config, resolve_threads
from .runner import SummaryRow, run_experiment, summarize, write_summary_csv
from .audit import TraceAudit, audit_trace_file, audit_directory

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "resolve_threads",
    "SummaryRow",
    "run_experiment",
    "summarize",
    "write_summary_csv",
    "TraceAudit",
    "audit_trace_file",
    "audit_directory",
]
