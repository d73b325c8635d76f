"""
Phi Checks Module for Superform Lab

This module provides the ``phi`` suite: the Dirichlet-type series φ(s)
computed by quadrature of the lattice sums against its closed series for
each requested s < 0, and the identity for dφ(0). φ is defined for odd
N > 1 only; other ranks get a single informational record.
"""

import logging

from core.flat_bundle import random_germ
from core.lattice_sums import phi_checks as phi_suite

logger = logging.getLogger(__name__)

# Relative agreement of quadrature and series
PHI_TOLERANCE = 1e-6


def phi_checks(scenario):
    """
    Run the φ suite for one scenario.

    Args:
        scenario (Scenario): rank, base dimension, jet order, seed, s values and lattice scale

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("phi", scenario.to_payload())
    rank = scenario.n
    if rank == 1 or rank % 2 == 0:
        report.record("thm2.24/domain", "Thm 2.24, φ(s) is defined for odd N > 1", 0.0, 0.0,
                      {"N": rank}, details=f"skipped for N={rank}", informational=True)
        return report
    germ = random_germ(rank, scenario.m, scenario.order, scenario.scalar_mode, scenario.seed + 2,
                       unimodular=True, lattice_scale=scenario.lattice_scale)
    tolerance = max(scenario.tolerance, PHI_TOLERANCE)
    logger.info("phi: N=%d m=%d K=%d s=%s", rank, scenario.m, scenario.order, list(scenario.s))
    return report.merge(phi_suite(germ, tuple(float(s) for s in scenario.s), tolerance, scenario.floor))
