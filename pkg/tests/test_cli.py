import csv
import io
import json
import subprocess
import sys
from decimal import Decimal, localcontext

import jsonschema
import pytest

from constforge.cli import SCHEMAS, main
from frozen import CF_ONE, ENCODED, PRIME_CONSTANT
from oracles import PRIMES_100


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, command, *argv):
    code, out, err = run(capsys, command, *argv, "--format", "json")
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS[command])
    return code, payload


def test_eval_a21_text(capsys):
    code, out, _ = run(capsys, "eval", "--A", "2", "1", "--digits", "30")
    assert code == 0
    with localcontext() as dec:
        dec.prec = 30
        expected = str(+Decimal(ENCODED[(2, 1)]))
    assert out.splitlines()[0] == expected == "3.82137226928489599538164942284"


def test_eval_cf_json(capsys):
    code, payload = run_json(capsys, "eval", "--cf", "1", "--digits", "20")
    assert code == 0
    assert payload["value"] == CF_ONE[:22]
    assert payload["certified_digits"] >= 20


@pytest.mark.parametrize("argv", [
    ["--series", "1/2"], ["--closed-A", "4", "2"], ["--expr", "gamma(1/2)^2/pi"],
])
def test_eval_other_targets(capsys, argv):
    code, payload = run_json(capsys, "eval", *argv, "--digits", "25")
    assert code == 0 and payload["certified_digits"] >= 25


@pytest.mark.parametrize("argv", [
    ["eval", "--A", "0", "1"],
    ["eval", "--expr", "gamma(0)"],
    ["eval", "--expr", "erf("],
    ["eval", "--A", "2", "1", "--digits", "4"],
    ["eval"],
    ["frobnicate"],
    ["scan", "--alpha-range", "1..1", "--beta-range", "1..1"],
    ["verify"],
    ["verify", "/nonexistent/manifest.mf"],
])
def test_usage_and_domain_errors_exit_2(capsys, argv):
    code, _out, _err = run(capsys, *argv)
    assert code == 2


def test_bad_manifest_reports_line_and_column(capsys, tmp_path):
    path = tmp_path / "bad.mf"
    path.write_text("identity x\n  lhs = 1\n  rhs = erf(\nend\n")
    code, _out, err = run(capsys, "verify", str(path))
    assert code == 2
    assert f"{path}:3:13:" in err


def test_failing_identity_exits_1(capsys, tmp_path):
    path = tmp_path / "wrong.mf"
    path.write_text("identity wrong\n  lhs = pi\n  rhs = 22/7\nend\n")
    code, payload = run_json(capsys, "verify", str(path), "--digits", "20")
    assert code == 1
    assert payload["summary"] == {"pass": 0, "fail": 1}


def test_pole_identity_exits_1_with_reason(capsys, tmp_path):
    path = tmp_path / "pole.mf"
    path.write_text("identity pole\n  lhs = 1\n  rhs = gamma(0)\nend\n")
    code, payload = run_json(capsys, "verify", str(path), "--digits", "20")
    assert code == 1
    assert payload["reports"][0]["reason"].startswith("pole")


def test_verify_builtin_low_precision(capsys):
    code, payload = run_json(capsys, "verify", "--builtin", "--digits", "8")
    assert code == 0
    assert payload["summary"] == {"pass": 8, "fail": 0}


def test_verify_builtin_csv(capsys):
    code, out, _ = run(capsys, "verify", "--builtin", "--digits", "12", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 8
    assert all(r["pass"] == "True" for r in rows)


def test_decode_odd_numbers(capsys):
    code, payload = run_json(capsys, "decode", "--A", "2", "1", "--steps", "5",
                             "--digits", "100")
    assert code == 0
    assert [s["s"] for s in payload["steps"]] == [3, 5, 7, 9, 11]
    assert payload["start_index"] == 2


def test_decode_primes(capsys):
    code, out, _ = run(capsys, "decode", "--primes", "--steps", "20", "--digits", "200",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [int(r["s_n"]) for r in rows] == PRIMES_100[:20]


def test_decode_value_string(capsys):
    code, payload = run_json(capsys, "decode", "--value", PRIME_CONSTANT, "--steps", "40",
                             "--digits", "60")
    assert code == 0
    decoded = [s["s"] for s in payload["steps"]]
    assert decoded == PRIMES_100[:len(decoded)] and len(decoded) >= 20
    assert payload["failure"]["reason"] == "precision_exhausted"


def test_decode_budget_refusal_exit_3(capsys):
    code, _out, err = run(capsys, "decode", "--A", "2", "1", "--steps", "1000",
                          "--digits", "50")
    assert code == 3
    assert "digits" in err and any(tok.isdigit() and int(tok) > 2000 for tok in err.split())


def test_probe_truncation(capsys):
    code, payload = run_json(capsys, "probe", "--truncation", "50", "--A", "2", "1")
    assert code == 0 and payload["within_tolerance"]


def test_probe_rational_degenerate(capsys):
    code, payload = run_json(capsys, "probe", "--rational", "3", "1", "--A", "2", "1")
    assert code == 0
    assert payload["failure"] == {"index": 1, "reason": "r_out_of_range"}


def test_probe_rational_primes(capsys):
    code, payload = run_json(capsys, "probe", "--rational", "2920050977316", "1000000000000",
                             "--primes")
    assert code == 0
    assert payload["decoded"][:4] == [2, 3, 5, 7]
    assert payload["integral"] is True and payload["failure"] is not None


def test_scan_rows(capsys):
    code, out, _ = run(capsys, "scan", "--alpha-range", "2..4", "--beta-range", "1..2",
                       "--digits", "30")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    assert all(int(r["matched_digits"]) >= 28 for r in rows)


def test_scan_json_schema(capsys):
    code, payload = run_json(capsys, "scan", "--alpha-range", "2..3", "--beta-range",
                             "1..alpha", "--digits", "20")
    assert code == 0 and len(payload["rows"]) == 5


def test_digits_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CONSTFORGE_DIGITS", "12")
    code, payload = run_json(capsys, "eval", "--A", "2", "1")
    assert code == 0 and payload["digits"] == 12


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "eval", "--A", "3", "1", "--format", "json",
                       "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["target"] == "A(3,1)"


def test_module_entry_point_byte_identical():
    argv = [sys.executable, "-m", "constforge", "verify", "--builtin", "--digits", "20",
            "--deterministic", "--format", "json"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second
    assert json.loads(first)["summary"]["fail"] == 0
