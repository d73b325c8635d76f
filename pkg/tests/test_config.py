from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.errors import ScenarioError
from core.scalars import ScalarMode
from utils.config import (
    SUITE_NAMES,
    Scenario,
    build_scenario,
    load_scenario_file,
    parse_scenario_text,
)


def test_parse_scenario_text():
    text = "suite = lattice\n# full-line comment\nm = 5   # trailing comment\n\nlattice-scale = 2\n"
    assert parse_scenario_text(text) == {"suite": "lattice", "base_dim": "5", "lattice_scale": "2"}


@pytest.mark.parametrize("text", ["n 3", "colour = blue", "n = 1\nn = 2"])
def test_parse_scenario_text_errors(text):
    with pytest.raises(ScenarioError):
        parse_scenario_text(text)


def test_defaults_follow_the_desk_profile():
    scenario = build_scenario()
    assert (scenario.suite, scenario.n, scenario.m, scenario.order) == ("all", 1, 1, 3)
    assert scenario.scalar_mode is ScalarMode.FLOAT
    assert scenario.suites == SUITE_NAMES
    assert scenario.fixed_radius is None


def test_rank_three_defaults():
    scenario = build_scenario(overrides={"n": "3"})
    assert (scenario.m, scenario.order) == (5, 2)


def test_flags_override_the_file(tmp_path):
    path = tmp_path / "scenario.txt"
    path.write_text("n = 2\nseed = 4\nt = 0.5, 1, 2\n", encoding="utf-8")
    scenario = build_scenario(load_scenario_file(path), {"seed": "9", "lattice_scale": "3/2", "n": None})
    assert scenario.n == 2
    assert scenario.seed == 9
    assert scenario.t == (0.5, 1.0, 2.0)
    assert scenario.lattice_scale == Fraction(3, 2)


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario_file(tmp_path / "absent.txt")


@pytest.mark.parametrize("overrides", [
    {"n": "9"},
    {"n": "two"},
    {"mode": "symbolic"},
    {"suite": "everything"},
    {"t": "-1"},
    {"jet_order": "5"},
    {"radius": "-2"},
    {"tolerance": "0"},
    {"floor": "-1"},
    {"jet_order": "1"},
    {"suite": "torsion", "jet_order": "1"},
    {"suite": "exact-identities", "n": "3", "jet_order": "1"},
])
def test_invalid_scenarios(overrides):
    with pytest.raises(ScenarioError):
        build_scenario(overrides=overrides)


def test_payload_leaves_out_runtime_keys():
    scenario = build_scenario(overrides={"report": "out.json", "workers": "2", "radius": "4"})
    payload = scenario.to_payload()
    assert "report" not in payload and "workers" not in payload
    assert payload["m"] == 1 and payload["K"] == 3
    assert scenario.fixed_radius == 4.0


@given(st.integers(1, 4), st.integers(0, 10_000))
def test_base_dimension_default(n, seed):
    scenario = Scenario(n=n, seed=seed)
    assert scenario.m == 2 * n - 1
    assert scenario.with_suite("fock").suites == ("fock",)


@pytest.mark.parametrize("suite", ["lattice", "phi", "fock"])
def test_order_one_is_allowed_without_d_checks(suite):
    scenario = build_scenario(overrides={"suite": suite, "n": "3", "jet_order": "1"})
    assert (scenario.m, scenario.order) == (5, 1)


def test_floor_is_read_from_the_file(tmp_path):
    path = tmp_path / "scenario.txt"
    path.write_text("suite = phi\nfloor = 1e-20\n", encoding="utf-8")
    scenario = build_scenario(load_scenario_file(path))
    assert scenario.floor == 1e-20
    assert build_scenario().floor == 1e-30
