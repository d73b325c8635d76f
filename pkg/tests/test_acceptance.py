import time

import pytest

import main as cli
from utils.config import build_scenario


def scenario(suite, seconds, **overrides):
    label = "-".join([suite] + [f"{key}{value}".replace(" ", "") for key, value in overrides.items()])
    return pytest.param(suite, overrides, seconds, id=label)


# suite, overrides and the wall-clock allowance of one run
ACCEPTANCE = [
    scenario("exact-identities", 30, n="1", mode="exact"),
    scenario("exact-identities", 30, n="2", mode="exact"),
    scenario("exact-identities", 30, n="3", mode="exact"),
    scenario("jets", 120, n="1", t="0.5, 1, 2"),
    scenario("jets", 120, n="3", t="0.5, 1, 2"),
    scenario("thom", 120, n="1"),
    scenario("thom", 180, n="3"),
    scenario("lattice", 120, n="1", lattice_scale="2"),
    scenario("lattice", 180, n="3", jet_order="1"),
    scenario("phi", 180, n="3", jet_order="1", s="-3, -5"),
    scenario("torsion", 120, n="1"),
    scenario("torsion", 180, n="2"),
    scenario("fock", 60, n="1"),
    scenario("fock", 120, n="3", jet_order="1"),
]


@pytest.mark.slow
@pytest.mark.parametrize("suite, overrides, seconds", ACCEPTANCE)
def test_acceptance_scenario(suite, overrides, seconds):
    start = time.perf_counter()
    report = cli.run_suite(suite, build_scenario(overrides={"suite": suite, **overrides}), workers=1)
    elapsed = time.perf_counter() - start
    assert report.passed, [(c.check_id, c.residual, c.details) for c in report.failures()]
    assert elapsed < seconds, f"{suite} took {elapsed:.1f}s"
