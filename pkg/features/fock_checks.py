"""
Fock Checks Module for Superform Lab

This module provides the ``fock`` suite, the bridge between Clifford
supertraces and Berezin integrals: the Clifford relations, the top
supertrace, the Gaussian supertrace identity, the scaling relation between
the Koszul forms and the Thom forms, and the Fourier-mode decomposition of
the torus superconnection (with the binomial sub-check).
"""

import logging

from core.fock import bridge_identity_check
from core.flat_bundle import random_germ
from core.scalars import ScalarMode
from core.superconnection import fourier_suite, scaling_check

logger = logging.getLogger(__name__)

# Scaling and per-mode agreement
BRIDGE_TOLERANCE = 1e-8

# Time of the Fourier decomposition; the modes are compared with δ_{t/4}
FOURIER_TIME = 4.0


def scaling_section(rank):
    """Dual section values (½, -¼, ½, ...) for the scaling relation."""
    return tuple(0.5 if k % 2 == 0 else -0.25 for k in range(rank))


def fock_checks(scenario, workers=None):
    """
    Run the Fock-space bridge suite for one scenario.

    Args:
        scenario (Scenario): rank, base dimension, jet order, mode, seed and times
        workers (int): threads for the lattice sums of the mode comparison

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("fock", scenario.to_payload())
    rank, base_dim, order = scenario.n, scenario.m, scenario.order
    tol = max(scenario.tolerance, BRIDGE_TOLERANCE)
    logger.info("fock bridge: N=%d m=%d K=%d mode=%s", rank, base_dim, order, scenario.scalar_mode.value)

    report.merge(bridge_identity_check(rank, base_dim, scenario.scalar_mode, scenario.seed, scenario.tolerance))

    germ = random_germ(rank, base_dim, order, ScalarMode.FLOAT, scenario.seed, lattice_scale=scenario.lattice_scale)
    if rank % 2:
        for t in scenario.t:
            report.merge(scaling_check(germ, scaling_section(rank), float(t), tol), prefix=f"t{float(t):g}/")
    report.merge(fourier_suite(germ, FOURIER_TIME, tol, workers=workers))
    return report
