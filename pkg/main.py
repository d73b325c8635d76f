import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

# Add the project root directory to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.errors import ScenarioError, SuperformError
from features import SUITES, THREADED_SUITES
from utils.config import ALL_SUITES, SUITE_NAMES, build_scenario, load_scenario_file
from utils.helpers import format_duration
from utils.logging_setup import configure_logging
from utils.platform_utils import worker_cap
from utils.report import VerificationReport, load_report, report_render, write_report
from utils.traces import write_traces

logger = logging.getLogger("superform")

# Exit statuses
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# Flag destinations that map onto Scenario fields
SCENARIO_FLAGS = ("suite", "n", "base_dim", "jet_order", "mode", "seed", "t", "s", "lattice_scale",
                  "radius", "tolerance", "floor", "report", "csv_dir", "workers")


def build_parser():
    """
    Command-line parser with the ``run`` and ``render`` actions.

    Every ``run`` flag defaults to None so that scenario-file values are
    only overridden by flags that were actually given.
    """
    parser = argparse.ArgumentParser(prog="superform-lab",
                                     description="Numerical verification of superform identities.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    actions = parser.add_subparsers(dest="action", required=True)

    run = actions.add_parser("run", help="run verification suites and write a report")
    run.add_argument("--scenario", metavar="PATH", help="key = value scenario file")
    run.add_argument("--suite", choices=SUITE_NAMES + (ALL_SUITES,))
    run.add_argument("--n", help="fiber rank N")
    run.add_argument("--base-dim", dest="base_dim", help="base dimension m")
    run.add_argument("--jet-order", dest="jet_order", help="jet order K")
    run.add_argument("--mode", choices=("exact", "float"))
    run.add_argument("--seed")
    # nargs lets "--s -3 -5" through, where a single "-3,-5" token would read as a flag
    run.add_argument("--t", nargs="+", help="times, space or comma separated")
    run.add_argument("--s", nargs="+", help="points of φ(s), space or comma separated (--s=-3,-5 also works)")
    run.add_argument("--lattice-scale", dest="lattice_scale", help="c, with Λ = cZ^N (p/q accepted)")
    run.add_argument("--radius", help="'auto' or a fixed window radius")
    run.add_argument("--tol", dest="tolerance")
    run.add_argument("--floor", help="magnitude below which integrands and fitted sums count as zero")
    run.add_argument("--report", metavar="PATH", help="report file (default: report.json)")
    run.add_argument("--csv", dest="csv_dir", metavar="DIR", help="directory for CSV traces")
    run.add_argument("--workers", help="worker cap (default: physical cores)")
    run.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    render = actions.add_parser("render", help="print the summary table of a report file")
    render.add_argument("path", metavar="REPORT")
    render.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return parser


def run_suite(name, scenario, workers):
    """
    Run one suite; an error outside the suite's checks becomes a failed setup check.

    Returns:
        VerificationReport
    """
    start = time.perf_counter()
    function = SUITES[name]
    try:
        if name in THREADED_SUITES:
            report = function(scenario.with_suite(name), workers=workers)
        else:
            report = function(scenario.with_suite(name))
    except SuperformError as error:
        logger.error("suite %s aborted: %s", name, error)
        report = VerificationReport(name, scenario.with_suite(name).to_payload())
        report.record("setup", f"{name} suite construction", None, 0.0, {"suite": name},
                      details=f"{type(error).__name__}: {error}")
    failed = len(report.failures())
    logger.info("suite %s: %d checks, %d failed, %s", name, len(report), failed,
                format_duration(time.perf_counter() - start))
    return report


def run_suites(scenario):
    """
    Run the scenario's suites concurrently and assemble one report.

    Suites run on a thread pool bounded by the worker cap; the reports are
    merged in SUITE_NAMES order, each check id prefixed by its suite when
    more than one suite ran.

    Returns:
        tuple: (combined report, list of per-suite reports)
    """
    cap = worker_cap(scenario.workers)
    names = scenario.suites
    inner = cap if len(names) == 1 else 1
    with ThreadPoolExecutor(max_workers=min(cap, len(names))) as pool:
        futures = {name: pool.submit(run_suite, name, scenario, inner) for name in names}
        reports = [futures[name].result() for name in names]
    if len(reports) == 1:
        return reports[0], reports
    combined = VerificationReport(scenario.suite, scenario.to_payload())
    for report in reports:
        combined.merge(report, prefix=f"{report.suite}/")
    return combined, reports


def run(args):
    """Execute the ``run`` action and return the exit status."""
    file_values = load_scenario_file(args.scenario) if args.scenario else {}
    overrides = {key: getattr(args, key) for key in SCENARIO_FLAGS}
    for key in ("t", "s"):
        if overrides[key] is not None:
            overrides[key] = ",".join(overrides[key])
    scenario = build_scenario(file_values, overrides)
    logger.info("scenario: suite=%s N=%d m=%d K=%d mode=%s seed=%d", scenario.suite, scenario.n,
                scenario.m, scenario.order, scenario.mode, scenario.seed)
    report, reports = run_suites(scenario)
    path = scenario.report or "report.json"
    try:
        write_report(report, path, worker_cap(scenario.workers))
    except OSError as error:
        raise ScenarioError(f"cannot write report {path}: {error}") from error
    if scenario.csv_dir:
        for suite_report in reports:
            write_traces(suite_report, scenario.csv_dir)
    for failure in report.failures():
        logger.warning("FAIL %s residual=%s tol=%g %s", failure.check_id, failure.residual,
                       failure.tolerance, failure.details)
    logger.info("%d checks, %d failed", len(report), len(report.failures()))
    return EXIT_PASS if report.passed else EXIT_FAIL


def render(args):
    """Execute the ``render`` action: print the table of a report file."""
    print(report_render(load_report(args.path)))
    return EXIT_PASS


def main(argv=None):
    """
    Main application entry point.
    Parses the command line, configures logging, and routes to the
    requested action.

    Returns:
        int: 0 when every check passes, 1 on a failing check, 2 on a usage or scenario error
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    # Route to the requested action
    actions = {"run": run, "render": render}
    try:
        return actions[args.action](args)
    except ScenarioError as error:
        logger.error("%s", error)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
