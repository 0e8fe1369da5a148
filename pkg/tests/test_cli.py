import json

import pytest

from sqpc import verify
from sqpc.cli import build_attack, build_parser, main
from sqpc.protocol import ConfigError, Phase
from sqpc.quantum import state


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def strip_timing(text):
    report = json.loads(text)
    report.pop("timing_ms")
    return report


def test_parser_defaults():
    args = build_parser().parse_args(["run", "--L", "2", "--pa", "01", "--pb", "10"])
    assert args.command == "run"
    assert args.seed == 0 and args.sampling == "quota" and args.attack == "none"
    assert args.pretty is False


def test_run_equal(capsys):
    code, out, _ = run_cli(capsys, "run", "--L", "4", "--pa", "1010", "--pb", "1010", "--seed", "7")
    report = json.loads(out)
    assert code == 0
    assert report["schema_version"] == "1"
    assert report["command"] == "run" and report["seed"] == 7
    assert report["config"]["L"] == 4
    assert report["result"]["verdict"] == "EQUAL"
    assert isinstance(report["timing_ms"], int)


def test_run_not_equal(capsys):
    code, out, _ = run_cli(capsys, "run", "--L", "4", "--pa", "1010", "--pb", "1011")
    assert code == 0
    assert json.loads(out)["result"]["c"] == "0001"


@pytest.mark.parametrize("argv", [
    ("run", "--pa", "10", "--L", "4", "--pb", "1010"),
    ("run", "--pa", "10", "--L", "4"),
    ("run", "--L", "2", "--pa", "1x", "--pb", "10"),
    ("run", "--L", "3", "--pa", "101", "--pb", "101"),
    ("attack", "--type", "ir9"),
    ("attack", "--type", "ir1", "--episodes", "0"),
    ("frobnicate",),
])
def test_usage_errors_exit_1(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 1
    assert out == "" and err


def test_run_under_attack_exits_2(capsys):
    code, out, _ = run_cli(capsys, "run", "--L", "4", "--pa", "1010", "--pb", "1010",
                           "--attack", "ir2", "--phase", "s1")
    assert code == 2
    assert json.loads(out)["result"]["abort"]["stage"] == "s1"


def test_bernoulli_shortfall_exits_1(capsys):
    codes = {run_cli(capsys, "run", "--L", "1", "--pa", "1", "--pb", "0", "--sampling",
                     "bernoulli", "--seed", str(s))[0] for s in range(12)}
    assert codes == {0, 1}


def test_run_json_is_deterministic(capsys):
    argv = ("run", "--L", "2", "--pa", "01", "--pb", "11", "--seed", "3", "--transcript")
    a = strip_timing(run_cli(capsys, *argv)[1])
    b = strip_timing(run_cli(capsys, *argv)[1])
    assert a == b
    assert a["result"]["transcript"][-1]["kind"] == "verdict"


def test_efficiency(capsys):
    code, out, _ = run_cli(capsys, "efficiency")
    rows = json.loads(out)["result"]["catalog"]
    assert code == 0 and len(rows) == 10
    assert rows[0]["eta"] == "1/66" and rows[-1]["eta"] == "1/70"
    code, pretty, _ = run_cli(capsys, "efficiency", "--pretty")
    assert "this work" in pretty and "1/66" in pretty


def test_attack_ir(capsys):
    code, out, _ = run_cli(capsys, "attack", "--type", "ir1", "--phase", "s1",
                           "--episodes", "4000")
    row = json.loads(out)["result"]["s1"]
    assert code == 0
    assert row["reference"] == "3/16" and row["reference_check"] == "PASS"
    assert row["closed_form"]["units"] == 8


def test_attack_em_constrained_both_phases(capsys):
    code, out, _ = run_cli(capsys, "attack", "--type", "em-constrained", "--episodes", "800")
    result = json.loads(out)["result"]
    assert code == 0
    assert result["s1"]["detections"] == 0 and result["s3"]["detections"] == 0
    assert result["s1"]["leakage_fidelity"]["m_a"] == pytest.approx(1.0, abs=1e-10)
    assert result["s3"]["leakage_fidelity"]["K"] == pytest.approx(1.0, abs=1e-10)
    assert set(result["parameters"]) == {"theta", "phi"}


def test_attack_mr_reports_both_reflect(capsys):
    code, out, _ = run_cli(capsys, "attack", "--type", "mr-leg1", "--episodes", "800")
    row = json.loads(out)["result"]["s1"]
    assert row["both_reflect"]["p_star"] == "1/2"
    assert row["both_reflect"]["other_case_detections"] == 0


def test_out_file_and_pretty(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "run", "--L", "2", "--pa", "01", "--pb", "01", "--pretty",
                           "--out", str(target))
    assert code == 0 and "verdict: EQUAL" in out
    assert json.loads(target.read_text())["result"]["verdict"] == "EQUAL"


def test_verify_quick(capsys):
    code, out, _ = run_cli(capsys, "verify", "--level", "quick", "--seed", "1")
    report = json.loads(out)
    assert code == 0 and report["result"]["status"] == "PASS"
    names = [c["name"] for c in report["result"]["checks"]]
    assert any("Gram" in n for n in names)
    assert any("correlation" in n for n in names)


def test_verify_quick_catches_sign_mutation(capsys, monkeypatch):
    terms = tuple((k, -s) if k == "0101" else (k, s) for k, s in state.CHI00_TERMS)
    monkeypatch.setattr(state, "CHI00_TERMS", terms)
    code, out, _ = run_cli(capsys, "verify", "--level", "quick")
    checks = {c["name"]: c["status"] for c in json.loads(out)["result"]["checks"]}
    assert code == 1
    assert checks["Z-Bell expansions re-sum to chi00"] == "FAIL"


def test_build_attack():
    assert build_attack("none", "s1") is None
    assert build_attack("ir3", "s3").phase is Phase.S3
    assert build_attack("em-violating", "s1").label == "em-violating"
    with pytest.raises(ConfigError):
        build_attack("laser", "s1")


def test_constrained_draws_reproducible():
    assert verify.constrained_draws(3, 5) == verify.constrained_draws(3, 5)
    assert verify.constrained_draws(3, 5) != verify.constrained_draws(3, 6)
