"""
Utilities Package for Superform Lab

This package contains utility modules used across the Superform Lab command line.
Modules included:
- config: Scenario dataclass, scenario files and flag overrides
- report: verification reports, JSON files and the summary table
- traces: CSV emission of suite traces
- platform_utils: host information and the worker cap
- logging_setup: logging configuration of the entry point
- helpers: digests and small formatting functions

The most used names are accessible directly from the utils package namespace.
"""

from .config import Scenario, build_scenario, load_scenario_file
from .helpers import format_duration, inputs_digest
from .platform_utils import get_system_info, worker_cap
from .report import VerificationReport, load_report, report_render, write_report

# Define exported symbols
__all__ = [
    # Configuration
    "Scenario",
    "build_scenario",
    "load_scenario_file",

    # Reports
    "VerificationReport",
    "load_report",
    "report_render",
    "write_report",

    # Helper utilities
    "format_duration",
    "inputs_digest",
    "get_system_info",
    "worker_cap",
]
