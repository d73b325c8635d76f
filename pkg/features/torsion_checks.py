"""
Torsion Checks Module for Superform Lab

This module provides the ``torsion`` suite: the f-forms of flat
superconnections on a random acyclic two-term complex and on its sum with a
zero-differential summand, their transgression in t and limits at
t = 10^{±3}, the anomaly formula of the torsion forms, the f-forms of a
single bundle, and the Koszul complex off the zero section.
"""

import logging

from core.flat_bundle import Field, random_germ
from core.scalars import ScalarMode
from core.superconnection import (
    anomaly_check,
    characteristic_form_check,
    koszul_suite,
    random_two_term,
    split_with_trivial,
    superconnection_checks,
)

logger = logging.getLogger(__name__)

# Times at which the f-forms are checked for closedness and transgression
SUPERCONNECTION_TIMES = (0.5, 2.0)

# Floors on the scenario tolerance for the quadrature-backed checks
SUPERCONNECTION_TOLERANCE = 1e-8
ANOMALY_TOLERANCE = 1e-6

# Offset between the seeds of the two-term complex and of its trivial summand
SPLIT_SEED_OFFSET = 7


def koszul_point(rank):
    """A nonzero constant point (1, ½, ⅓, ...) of the fiber."""
    return tuple(1.0 / (k + 1) for k in range(rank))


def complex_checks(report, cx, prefix, tolerance, floor):
    """Merge the superconnection and anomaly checks of one complex under ``prefix``."""
    logger.info("complex %s: ranks %s, cohomology %s", cx.label, cx.ranks(), cx.cohomology())
    report.merge(superconnection_checks(cx, SUPERCONNECTION_TIMES, max(tolerance, SUPERCONNECTION_TOLERANCE)),
                 prefix=prefix)
    report.merge(anomaly_check(cx, max(tolerance, ANOMALY_TOLERANCE), floor=floor), prefix=prefix)


def torsion_checks(scenario):
    """
    Run the torsion suite for one scenario.

    Args:
        scenario (Scenario): rank, base dimension, jet order and seed

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("torsion", scenario.to_payload())
    rank, base_dim, order = scenario.n, scenario.m, scenario.order
    tol = scenario.tolerance
    logger.info("torsion forms: N=%d m=%d K=%d seed=%d", rank, base_dim, order, scenario.seed)

    two_term = random_two_term(base_dim, order, scenario.seed, rank)
    complex_checks(report, two_term, "two-term/", tol, scenario.floor)
    split = split_with_trivial(two_term, 0, scenario.seed + SPLIT_SEED_OFFSET, rank)
    complex_checks(report, split, "split/", tol, scenario.floor)

    bundle = random_germ(rank, base_dim, order, ScalarMode.FLOAT, scenario.seed, Field.COMPLEX)
    report.merge(characteristic_form_check(bundle, max(tol, 1e-10)), prefix="bundle/")

    koszul_base = random_germ(rank, base_dim, order, ScalarMode.FLOAT, scenario.seed + 1)
    report.merge(koszul_suite(koszul_base, koszul_point(rank), float(scenario.t[0]),
                              max(tol, ANOMALY_TOLERANCE), floor=scenario.floor), prefix="koszul/")
    return report
