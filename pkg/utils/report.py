"""
Report Utilities Module for Superform Lab

This module provides the verification report: one record per executed
check (id, reference, inputs, residual, tolerance, pass/fail), JSON
serialization with a deterministic payload, and the tabulate summary
table used by the ``render`` action.

Timestamps, host data and wall times live in the report header so that
equal scenarios produce byte-identical payloads.
"""

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace

from tabulate import tabulate

from core.errors import ScenarioError, SuperformError
from utils.helpers import inputs_digest
from utils.platform_utils import get_system_info

logger = logging.getLogger(__name__)

# Residual string used for checks that vanish exactly
EXACT_ZERO = "exact-zero"

# Significant digits kept for float residuals in the payload
RESIDUAL_DIGITS = 6

STATUS_PASS = "PASS"
STATUS_FAIL = "FAIL"
STATUS_INFO = "INFO"


@dataclass
class CheckResult:
    """
    Outcome of a single check.

    Args:
        check_id (str): stable id, embeds the reference (e.g. "thm2.19/eq2.69")
        reference (str): human-readable reference string
        residual: float, EXACT_ZERO, or None when the check raised
        tolerance (float): pass threshold (0 for exact checks)
        passed (bool): residual <= tolerance
        inputs (dict): parameters that identify the check
        details (str): error message or extra diagnostics
        informational (bool): reported but never gating the overall status
        digest (str): short hash of ``inputs``
    """

    check_id: str
    reference: str
    residual: object
    tolerance: float
    passed: bool
    inputs: dict = field(default_factory=dict)
    details: str = ""
    informational: bool = False
    digest: str = ""

    @property
    def status(self):
        if self.informational:
            return STATUS_INFO
        return STATUS_PASS if self.passed else STATUS_FAIL


def format_residual(value, exact):
    """Residual as stored in the payload."""
    if value is None:
        return None
    value = float(value)
    if exact and value == 0.0:
        return EXACT_ZERO
    if math.isnan(value) or math.isinf(value):
        return str(value)
    return float(f"{value:.{RESIDUAL_DIGITS}e}")


class VerificationReport:
    """
    Collection of check results for one suite run.

    Example:
        >>> report = VerificationReport("demo")
        >>> report.record("trivial/zero", "trivial", 0.0, 0.0, exact=True).residual
        'exact-zero'
    """

    def __init__(self, suite, scenario=None):
        self.suite = suite
        self.scenario = dict(scenario or {})
        self.checks = []
        self.timings = {}
        self.traces = {}

    def record(self, check_id, reference, residual, tolerance, inputs=None, exact=False,
               details="", informational=False):
        """Append a check whose residual is already known."""
        shown = format_residual(residual, exact)
        passed = residual is not None and not math.isnan(float(residual)) and float(residual) <= tolerance
        check_id = self._unique_id(check_id)
        inputs = dict(inputs or {})
        result = CheckResult(check_id, reference, shown, float(tolerance), passed,
                             inputs, details, informational, inputs_digest(inputs))
        self.checks.append(result)
        level = logging.DEBUG if passed or informational else logging.INFO
        logger.log(level, "%s [%s] residual=%s tol=%g", check_id, result.status, shown, tolerance)
        return result

    def check(self, check_id, reference, compute, tolerance, inputs=None, exact=False, informational=False):
        """
        Run ``compute`` (returning a residual) and record the outcome.

        A SuperformError raised by ``compute`` marks the check as failed
        with the message in its details; the suite carries on.
        """
        start = time.perf_counter()
        try:
            residual = compute()
            details = ""
        except SuperformError as error:
            residual = None
            details = f"{type(error).__name__}: {error}"
            logger.warning("check %s raised %s", check_id, details)
        elapsed = round(time.perf_counter() - start, 6)
        if isinstance(residual, tuple):
            residual, details = residual
        result = self.record(check_id, reference, residual, tolerance, inputs, exact, details, informational)
        self.timings[result.check_id] = elapsed
        return result

    def _unique_id(self, check_id):
        """``check_id``, or ``check_id#k`` when the id was already recorded."""
        taken = {c.check_id for c in self.checks}
        if check_id not in taken:
            return check_id
        k = 2
        while f"{check_id}#{k}" in taken:
            k += 1
        logger.warning("duplicate check id %s recorded as %s#%d", check_id, check_id, k)
        return f"{check_id}#{k}"

    def add_trace(self, name, row):
        """Append one row (a dict) to the CSV trace ``name``."""
        self.traces.setdefault(name, []).append(dict(row))

    def merge(self, other, prefix=""):
        """
        Append the checks, timings and traces of ``other``.

        Args:
            other (VerificationReport): report of a sub-suite
            prefix (str): prepended to every merged check id (e.g. "koszul/")
        """
        for check in other.checks:
            new_id = self._unique_id(prefix + check.check_id)
            if check.check_id in other.timings:
                self.timings[new_id] = other.timings[check.check_id]
            self.checks.append(replace(check, check_id=new_id))
        for name, rows in other.traces.items():
            self.traces.setdefault(name, []).extend(rows)
        return self

    @property
    def passed(self):
        return all(c.passed or c.informational for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not (c.passed or c.informational)]

    def to_payload(self):
        checks = sorted((asdict(c) for c in self.checks), key=lambda c: c["check_id"])
        for entry in checks:
            entry["status"] = (STATUS_INFO if entry["informational"]
                               else STATUS_PASS if entry["passed"] else STATUS_FAIL)
        return {
            "suite": self.suite,
            "scenario": self.scenario,
            "status": STATUS_PASS if self.passed else STATUS_FAIL,
            "checks": checks,
        }

    def __len__(self):
        return len(self.checks)


def build_header(workers=None):
    info = get_system_info()
    return {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "host": info["node"],
        "platform": info["platform"],
        "python": info["python_version"],
        "workers": workers,
    }


def payload_json(report):
    """Deterministic serialization of the payload part."""
    return json.dumps(report.to_payload(), sort_keys=True, indent=2, default=str)


def write_report(report, path, workers=None):
    """Write ``{"header": ..., "payload": ...}`` to ``path``."""
    header = build_header(workers)
    header["timings"] = dict(sorted(report.timings.items()))
    document = {"header": header, "payload": report.to_payload()}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, sort_keys=True, indent=2, default=str)
        handle.write("\n")
    logger.info("report written to %s", path)
    return path


def load_report(path):
    """
    Read a report file.

    Raises:
        ScenarioError: the file is not a report
    """
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as error:
        raise ScenarioError(f"cannot read report {path}: {error}") from error
    if not isinstance(document, dict) or "payload" not in document:
        raise ScenarioError(f"{path} is not a superform-lab report")
    payload = document["payload"]
    if not isinstance(payload, dict) or not isinstance(payload.get("checks", []), list):
        raise ScenarioError(f"{path} has a malformed payload")
    return document


REPORT_COLUMNS = ["Check", "Reference", "Residual", "Tolerance", "Status"]


def report_render(document):
    """
    Human-readable summary table, sorted by check id.

    Args:
        document (dict): a loaded report (or just its payload)

    Returns:
        str: the table followed by a one-line summary
    """
    payload = document.get("payload", document)
    rows = []
    for check in sorted(payload.get("checks", []), key=lambda c: c.get("check_id", "")):
        try:
            rows.append([check["check_id"], check.get("reference", ""), check.get("residual"),
                         check.get("tolerance"), check.get("status") or
                         (STATUS_PASS if check.get("passed") else STATUS_FAIL)])
        except KeyError as error:
            raise ScenarioError(f"malformed check entry, missing {error}") from error
    table = tabulate(rows, headers=REPORT_COLUMNS, tablefmt="github", disable_numparse=True)
    failed = sum(1 for row in rows if row[4] == STATUS_FAIL)
    summary = f"{payload.get('suite', '?')}: {len(rows)} checks, {failed} failed, status {payload.get('status', '?')}"
    return table + "\n\n" + summary
