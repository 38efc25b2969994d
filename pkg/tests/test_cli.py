import json

import pytest

from reglab.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, main, parse_complex


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_parse_complex():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("-2.5j") == -2.5j
    assert parse_complex(" 0.5 ") == 0.5


def test_malformed_complex_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["dilog", "--z", "1+2k"])
    assert info.value.code == 2


def test_dilog_report_envelope(capsys):
    code, rep = run(capsys, "dilog", "--z", "0.5", "--z", "0.3+0.4i", "--q", "0.01")
    assert code == EXIT_OK
    assert set(rep) == {"tool", "version", "command", "config_hash", "seed", "config", "settings", "result"}
    assert rep["command"] == "dilog" and len(rep["result"]["values"]) == 2
    assert "Rq" in rep["result"]["values"][1]


def test_kronecker_routes(capsys):
    code, rep = run(capsys, "kronecker", "--lattice", "gaussian", "--point", "1/7,2/7")
    assert code == EXIT_OK
    k21 = rep["result"]["points"][0]["k21"]
    assert set(k21["values"]) == {"qseries", "continued", "direct"}
    code, rep = run(capsys, "kronecker", "--point", "1/3,0", "--s", "2.5", "--a", "0")
    assert code == EXIT_OK and "K" in rep["result"]["points"][0]


def test_check_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["check", "oddness", "--seed", "3", "--out", str(a)]) == EXIT_OK
    assert main(["check", "oddness", "--seed", "3", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["result"]["summary"] == {"oddness": "pass"}


def test_check_unknown_suite(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check", "nope"])
    assert info.value.code == 2


def test_heckeL_dry_run_skips_direct(capsys):
    code, rep = run(capsys, "heckeL", "--dry-run")
    assert code == EXIT_OK
    assert all("direct" not in row for row in rep["result"]["classes"])


def test_heckeL_small_bound_fails_assertion(capsys):
    code, rep = run(capsys, "heckeL", "--norm-bound", "50", "--assert-rel", "1e-6")
    assert code == EXIT_FAILED and rep["result"]["worst_relative_error"] > 1e-6


def test_heckeL_bad_index(capsys):
    code, rep = run(capsys, "heckeL", "--phi-index", "7")
    assert code == EXIT_ERROR and rep["error"]["type"] == "ConfigError"


def test_stark_dry_run(capsys):
    code, rep = run(capsys, "stark", "--dry-run")
    assert code == EXIT_OK
    assert rep["result"]["plan"]["modulus"] == [3, 0]


def test_stark_bundled(capsys):
    code, rep = run(capsys, "stark", "qi_mod3")
    assert code == EXIT_OK
    assert rep["result"]["recognition"]["value"] == "-112/75"
    assert rep["result"]["assertions"]["failed"] == []


def test_stark_missing_field(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"D": -4, "modulus": "3"}))
    code, rep = run(capsys, "stark", str(cfg))
    assert code == EXIT_ERROR
    assert rep["error"]["stage"] == "config" and "phi_fin_index" in rep["error"]["message"]


def test_stark_unreadable_config(capsys, tmp_path):
    code, rep = run(capsys, "stark", str(tmp_path / "missing.json"))
    assert code == EXIT_ERROR and rep["error"]["type"] == "ConfigError"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, rep = run(capsys, "stark", str(bad))
    assert code == EXIT_ERROR


def test_recognize(capsys):
    code, rep = run(capsys, "recognize", "-1.4933333333333334")
    assert code == EXIT_OK and rep["result"]["value"] == "-112/75"
    code, rep = run(capsys, "recognize", "3.14159265358979", "--max-den", "10")
    assert code == EXIT_FAILED


def test_library_error_stage_is_command(capsys):
    code, rep = run(capsys, "dilog", "--z", "2", "--q", "1.5")
    assert code == EXIT_ERROR
    assert rep["error"] == {"type": "NomeOutOfRange", "message": rep["error"]["message"], "stage": "dilog"}


def test_invalid_settings(capsys):
    code, rep = run(capsys, "dilog", "--z", "0.5", "--tol", "2")
    assert code == EXIT_ERROR and rep["error"]["type"] == "ConfigError"
