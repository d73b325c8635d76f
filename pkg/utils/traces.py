"""
Traces Module for Superform Lab

This module provides CSV emission for the traces a suite collects while it
runs (asymptotic sweeps, φ comparisons, torsion integrands). Each trace is
a list of flat dictionaries, written with pandas.
"""

import logging
import os

import pandas as pd

from core.errors import ScenarioError
from utils.helpers import trace_filename

logger = logging.getLogger(__name__)

# Float format of CSV cells
CSV_FLOAT_FORMAT = "%.12g"


def trace_frame(rows):
    """
    DataFrame of one trace with a stable column order.

    Columns keep their first-seen order; rows keep insertion order.
    """
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return pd.DataFrame(list(rows), columns=columns)


def write_traces(report, directory):
    """
    Write every trace of ``report`` to ``directory`` as CSV.

    Args:
        report (VerificationReport): report with collected traces
        directory (str): output directory, created when missing

    Returns:
        list: paths of the written files

    Raises:
        ScenarioError: the directory cannot be created or written
    """
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as error:
        raise ScenarioError(f"cannot create CSV directory {directory}: {error}") from error
    written = []
    for name, rows in sorted(report.traces.items()):
        if not rows:
            continue
        path = os.path.join(directory, trace_filename(report.suite, name))
        try:
            trace_frame(rows).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        except OSError as error:
            raise ScenarioError(f"cannot write trace {path}: {error}") from error
        logger.info("trace %s: %d rows -> %s", name, len(rows), path)
        written.append(path)
    return written
