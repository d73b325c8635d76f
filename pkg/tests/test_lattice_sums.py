import pytest

from core.flat_bundle import random_germ
from core.lattice_sums import asymptotic_checks, epsilon_at_unit_metric, float_germ, poisson_check
from core.scalars import ScalarMode
from features.phi_checks import phi_checks
from utils.config import Scenario
from utils.report import STATUS_INFO


def test_epsilon_sum_on_the_unit_metric():
    assert epsilon_at_unit_metric(1, 1.0) == pytest.approx(-0.25, abs=1e-12)


@pytest.mark.parametrize("rank", [1, 2])
def test_poisson_summation(rank):
    germ = float_germ(random_germ(rank, 1, 1, ScalarMode.FLOAT, seed=3, unimodular=True))
    report = poisson_check(germ, 1.0)
    assert report.passed, [(c.check_id, c.residual, c.details) for c in report.failures()]


def test_phi_suite_is_informational_for_rank_one():
    report = phi_checks(Scenario(suite="phi", n=1))
    assert report.passed
    assert [c.status for c in report.checks] == [STATUS_INFO]


def large_t_fit(floor):
    # the desk profile: nonzero modes near 1e-17, 1e-26 and 1e-34 (or an exact 0) at t = 1, 1.5, 2
    germ = random_germ(3, 5, 1, ScalarMode.FLOAT, seed=3, unimodular=True)
    report = asymptotic_checks(germ, floor=floor)
    return next(c for c in report.checks if c.check_id == "thm2.17/eq2.62")


def test_large_t_fit_is_skipped_when_every_sum_is_below_the_floor():
    fit = large_t_fit(1.0)
    assert fit.status == STATUS_INFO
    assert fit.details.startswith("skipped: 0 of 3")


def test_large_t_fit_is_gated_above_the_floor():
    fit = large_t_fit(1e-30)
    assert not fit.informational
    assert "slope" in fit.details
