"""
Lattice Checks Module for Superform Lab

This module provides the ``lattice`` suite: Poisson summation, closedness
of the lattice sums, their t-transgression over one window, Theorem 2.19's
equality (with lattice scale c and 2c), and the large- and small-t
asymptotics.

The identities between Σ μ*δ_t and Σ m*ρ_t need N odd and a germ whose
metric preserves the flat volume, so the suite draws a unimodular germ.
"""

import logging
from fractions import Fraction

from core.flat_bundle import random_germ
from core.lattice_sums import (
    asymptotic_checks,
    epsilon_at_unit_metric,
    float_germ,
    poisson_check,
    sum_checks,
    sum_pulled,
    thm219_check,
    window_transgression_check,
)
from core.scalars import ScalarMode
from core.thom_forms import DELTA

logger = logging.getLogger(__name__)

# Σ μ*ε_1 on the trivial rank-1 bundle with c = 1
UNIT_EPSILON = -0.25
UNIT_EPSILON_TOLERANCE = 1e-12

# Times of the large-t fit and of the small-t bound
LARGE_T_GRID = (1.0, 1.5, 2.0)
SMALL_T = 0.1

# Poisson agreement is checked to this accuracy regardless of the scenario tolerance
POISSON_TOLERANCE = 1e-12

# Shift of the Poisson check, in units of the dual lattice step
POISSON_SHIFT = Fraction(1, 3)


def fixed_radius_check(germ, t, radius, tolerance):
    """Tail bound of Σ μ*δ_t over the window of the requested radius."""
    value = sum_pulled(germ, DELTA, t, radius=radius)
    return value.tail_bound, f"{value.describe()}, target {tolerance:.1e}"


def lattice_checks(scenario, workers=None):
    """
    Run the lattice suite for one scenario.

    Args:
        scenario (Scenario): rank, base dimension, jet order, seed, times, scale and radius
        workers (int): threads for the pointwise lattice sums

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("lattice", scenario.to_payload())
    rank, base_dim, order = scenario.n, scenario.m, scenario.order
    tol = scenario.tolerance
    germ = random_germ(rank, base_dim, order, scenario.scalar_mode, scenario.seed + 2, unimodular=True,
                       lattice_scale=scenario.lattice_scale)
    g = float_germ(germ)
    inputs = {"N": rank, "m": base_dim, "K": order, "c": str(scenario.lattice_scale), "germ": germ.label}
    logger.info("lattice sums: N=%d m=%d K=%d c=%s t=%s", rank, base_dim, order,
                scenario.lattice_scale, list(scenario.t))

    report.check("eq2.64/unit-metric", "Eq (2.64) Σ μ*ε_1 = -1/4 on the trivial rank-1 bundle",
                 lambda: abs(epsilon_at_unit_metric(base_dim, 1.0) - UNIT_EPSILON), UNIT_EPSILON_TOLERANCE,
                 {"N": 1, "m": base_dim, "t": 1.0})
    shift = [float(POISSON_SHIFT) * (k + 1) for k in range(rank)]
    for t in scenario.t:
        t = float(t)
        prefix = f"t{t:g}/"
        report.merge(poisson_check(g, t, tolerance=POISSON_TOLERANCE), prefix=prefix)
        report.merge(poisson_check(g, t, b=shift, tolerance=POISSON_TOLERANCE), prefix=prefix + "shifted/")
        report.merge(sum_checks(g, t, tol, workers), prefix=prefix)
        report.merge(window_transgression_check(g, t, tol), prefix=prefix)
        if rank % 2:
            report.merge(thm219_check(g, t, tol), prefix=prefix)
            doubled = float_germ(random_germ(rank, base_dim, order, ScalarMode.FLOAT, scenario.seed + 2,
                                             unimodular=True, lattice_scale=2 * scenario.lattice_scale))
            report.merge(thm219_check(doubled, t, tol), prefix=prefix + "doubled-scale/")
        if scenario.fixed_radius is not None:
            report.check(f"{prefix}thm2.17/fixed-radius", "Thm 2.17 proof, Gaussian tail bound of a fixed window",
                         lambda t=t: fixed_radius_check(g, t, scenario.fixed_radius, tol), tol,
                         {**inputs, "t": t, "radius": scenario.fixed_radius})
    if rank % 2:
        report.merge(asymptotic_checks(germ, LARGE_T_GRID, SMALL_T, tol, scenario.floor))
    return report
