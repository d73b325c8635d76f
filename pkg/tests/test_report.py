import json

import pytest

from core.errors import DomainError, ScenarioError
from utils.report import (
    EXACT_ZERO,
    STATUS_FAIL,
    STATUS_INFO,
    STATUS_PASS,
    VerificationReport,
    load_report,
    payload_json,
    report_render,
    write_report,
)


def build(suite="demo"):
    report = VerificationReport(suite, {"n": 1})
    report.record("eq1/zero", "Eq (1) exact", 0.0, 0.0, {"N": 1}, exact=True)
    report.check("eq2/small", "Eq (2) float", lambda: 1e-12, 1e-10, {"N": 1, "t": 0.5})
    return report


def test_exact_zero_residual():
    check = build().checks[0]
    assert check.residual == EXACT_ZERO
    assert check.passed and check.status == STATUS_PASS


def test_a_raising_check_fails_without_aborting():
    report = build()

    def broken():
        raise DomainError("t must be positive")

    report.check("eq3/raises", "Eq (3)", broken, 1e-10)
    report.check("eq4/after", "Eq (4)", lambda: 0.0, 1e-10)
    failed = report.failures()
    assert [c.check_id for c in failed] == ["eq3/raises"]
    assert failed[0].residual is None
    assert failed[0].details == "DomainError: t must be positive"
    assert len(report) == 4


def test_details_from_a_tuple_residual():
    report = VerificationReport("demo")
    check = report.check("eq5", "Eq (5)", lambda: (2e-9, "window of 7 points"), 1e-10)
    assert not check.passed
    assert check.details == "window of 7 points"


def test_informational_checks_never_gate():
    report = build()
    report.record("rem/printed-sign", "printed sign", 1.0, 1e-10, informational=True)
    assert report.passed
    assert report.checks[-1].status == STATUS_INFO


def test_duplicate_ids_are_numbered():
    report = build()
    report.record("eq1/zero", "again", 0.0, 0.0)
    assert report.checks[-1].check_id == "eq1/zero#2"


def test_merge_prefixes_ids_and_keeps_traces():
    inner = build("inner")
    inner.add_trace("phi", {"s": -5.0, "relative": 1e-9})
    outer = VerificationReport("outer").merge(inner, prefix="t1/")
    assert sorted(c.check_id for c in outer.checks) == ["t1/eq1/zero", "t1/eq2/small"]
    assert outer.traces == {"phi": [{"s": -5.0, "relative": 1e-9}]}


def test_payload_is_deterministic():
    first, second = payload_json(build()), payload_json(build())
    assert first == second
    payload = json.loads(first)
    assert [c["check_id"] for c in payload["checks"]] == ["eq1/zero", "eq2/small"]
    assert payload["status"] == STATUS_PASS


def test_report_file_round_trip(tmp_path):
    path = tmp_path / "report.json"
    write_report(build(), str(path), workers=2)
    document = load_report(str(path))
    assert document["header"]["workers"] == 2
    assert document["payload"] == json.loads(payload_json(build()))


def test_load_report_rejects_other_files(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_report(str(path))
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_report(str(path))


def test_render_of_an_empty_report_is_header_only():
    text = report_render({"payload": {"suite": "demo", "status": STATUS_PASS, "checks": []}})
    lines = text.splitlines()
    assert "Check" in lines[0] and "Reference" in lines[0]
    assert text.endswith("demo: 0 checks, 0 failed, status PASS")


def test_render_marks_failures():
    report = VerificationReport("demo")
    report.record("eq9/fails", "Eq (9)", 3e-6, 1e-8)
    text = report_render({"payload": report.to_payload()})
    row = next(line for line in text.splitlines() if "eq9/fails" in line)
    assert STATUS_FAIL in row and "3e-06" in row and "1e-08" in row
    assert "1 failed" in text


def test_render_is_stable():
    document = {"payload": build().to_payload()}
    assert report_render(document) == report_render(json.loads(json.dumps(document)))
