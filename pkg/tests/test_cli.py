import json

import pytest

import main as cli
from core.errors import DomainError
from utils.report import VerificationReport


def passing_suite(scenario):
    report = VerificationReport("phi", scenario.to_payload())
    report.record("thm2.24/eq2.83/s-5", "series against quadrature", 1e-9, 1e-6, {"s": -5.0})
    report.add_trace("phi", {"s": -5.0, "quadrature": 1.0, "series": 1.0})
    return report


def failing_suite(scenario):
    report = VerificationReport("phi", scenario.to_payload())
    report.record("thm2.25/eq2.84", "dφ(0)", 1.0, 1e-6)
    return report


def aborting_suite(scenario):
    raise DomainError("φ needs odd N > 1")


def run(tmp_path, *flags):
    path = tmp_path / "report.json"
    status = cli.main(["run", "--suite", "phi", "--report", str(path), *flags])
    return status, path


def test_passing_run_writes_report_and_traces(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "phi", passing_suite)
    status, path = run(tmp_path, "--n", "3", "--csv", str(tmp_path / "traces"))
    assert status == cli.EXIT_PASS
    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["payload"]["status"] == "PASS"
    assert document["payload"]["scenario"]["n"] == 3
    assert (tmp_path / "traces" / "phi_phi.csv").exists()


def test_failing_check_exits_with_one(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "phi", failing_suite)
    status, _ = run(tmp_path)
    assert status == cli.EXIT_FAIL


def test_suite_error_becomes_a_failed_setup_check(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "phi", aborting_suite)
    status, path = run(tmp_path)
    assert status == cli.EXIT_FAIL
    checks = json.loads(path.read_text(encoding="utf-8"))["payload"]["checks"]
    assert [c["check_id"] for c in checks] == ["setup"]
    assert checks[0]["details"].startswith("DomainError")


def test_invalid_scenario_is_a_usage_error(tmp_path):
    status, path = run(tmp_path, "--n", "9")
    assert status == cli.EXIT_USAGE
    assert not path.exists()


def test_unknown_flag_value_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as raised:
        cli.main(["run", "--mode", "symbolic"])
    assert raised.value.code == cli.EXIT_USAGE


def test_equal_scenarios_give_equal_payloads(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "phi", passing_suite)
    payloads = []
    for name in ("first.json", "second.json"):
        path = tmp_path / name
        cli.main(["run", "--suite", "phi", "--seed", "5", "--report", str(path)])
        payloads.append(json.loads(path.read_text(encoding="utf-8"))["payload"])
    assert payloads[0] == payloads[1]


def test_render_action(tmp_path, monkeypatch, capsys):
    monkeypatch.setitem(cli.SUITES, "phi", passing_suite)
    _, path = run(tmp_path)
    assert cli.main(["render", str(path)]) == cli.EXIT_PASS
    out = capsys.readouterr().out
    assert "thm2.24/eq2.83/s-5" in out
    assert "1 checks, 0 failed" in out


def test_render_of_a_missing_file(tmp_path):
    assert cli.main(["render", str(tmp_path / "absent.json")]) == cli.EXIT_USAGE


@pytest.mark.parametrize("flags, expected", [
    (("--s", "-3", "-5"), [-3.0, -5.0]),
    (("--s=-3,-5",), [-3.0, -5.0]),
    (("--s", "-3", "--t", "1", "2"), [-3.0]),
])
def test_negative_phi_points_on_the_command_line(tmp_path, monkeypatch, flags, expected):
    monkeypatch.setitem(cli.SUITES, "phi", passing_suite)
    status, path = run(tmp_path, "--n", "3", *flags)
    assert status == cli.EXIT_PASS
    assert json.loads(path.read_text(encoding="utf-8"))["payload"]["scenario"]["s"] == expected
