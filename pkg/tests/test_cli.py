import csv
import io
import json

import pytest

from scswalk.cli import RunConfig, ConfigError, main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


def test_character_routes_agree():
    code, report = run_json("character", "--type", "A2", "--z", "0.4,0.4", "--lambda", "1,1")
    assert code == 0
    assert report["schema"] == "scswalk/1"
    assert report["passed"]
    assert all(d <= 1e-10 for d in report["relative_deltas"].values())


def test_survival_reflection_and_dp():
    code, report = run_json("survival", "--type", "A2", "--z", "0.4,0.4", "--route", "dp", "--horizon", "100")
    assert code == 0
    assert report["routes"]["dp"]["value"] >= 0.0598
    code, report = run_json("survival", "--type", "A", "--rank", "1", "--z", "0.5", "--route", "reflection")
    assert report["routes"]["reflection"]["value"] == pytest.approx(0.632120558829, abs=1e-12)


def test_survival_non_dominant_start():
    code, report = run_json("survival", "--type", "A2", "--z", "0.4,0.4", "--lambda=-1,0")
    assert code == 0
    assert report["dominant"] is False
    assert report["survival"] == 0.0


def test_whittaker_csv():
    code, text = run("whittaker-table", "--type", "A1", "--z", "0.5", "--q", "3", "--max-k", "2", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["lambda_coords", "value", "route", "delta", "sigma"]
    assert [r["lambda_coords"] for r in rows] == ["-1", "0", "1", "2"]
    assert float(rows[0]["value"]) == 0.0
    assert float(rows[1]["value"]) == pytest.approx(0.877374, abs=1e-6)


def test_padic_verify():
    code, report = run_json("padic-verify", "--p", "2,3", "--enumeration-bound", "2", "--precision", "3")
    assert code == 0 and report["passed"]


def test_config_errors_exit_2():
    assert run("character", "--type", "A2", "--z", "0.4")[0] == 2
    assert run("character", "--type", "G2", "--z", "0.4,0.4")[0] == 2
    assert run("character", "--type", "A2", "--z", "0.4,0.4", "--lambda", "1,-1")[0] == 2
    assert run("survival", "--type", "C2", "--z", "0.4,0.4", "--minuscule-index", "1")[0] == 2
    assert run("poisson", "--n", "1", "--z", "0.5")[0] == 2
    assert run("character", "--bogus")[0] == 2


def test_resource_cap_exit_3():
    code, _ = run("poisson", "--n", "2", "--z", "0.05", "--samples", "50", "--step-cap", "1")
    assert code == 3


def test_verification_failure_exit_1(capsys):
    code, report = run_json("verify-all", "--criteria", "1", "--tolerance-scale", "1e-12")
    assert code == 1
    assert report["failed"] == [1]
    assert "criterion  1 FAIL" in capsys.readouterr().err


def test_verify_all_subset_passes(capsys):
    code, report = run_json("verify-all", "--criteria", "1,3")
    assert code == 0
    err = capsys.readouterr().err
    assert "criterion  1 PASS" in err and "criterion  3 PASS" in err


def test_output_is_deterministic_and_thread_independent():
    args = ["survival", "--type", "A2", "--z", "0.4,0.4", "--route", "mc", "--horizon", "40",
            "--samples", "4000", "--seed", "9"]
    a = run(*args)
    b = run(*args)
    c = run(*args, "--threads", "3")
    assert a == b == c
    p = ["poisson", "--n", "2", "--z", "0.5", "--samples", "2000", "--seed", "3"]
    assert run(*p) == run(*p, "--threads", "2")


def test_config_file_round_trip(tmp_path):
    saved = tmp_path / "cfg.json"
    code, first = run("--save-config", str(saved), "character", "--type", "A2", "--z", "0.4,0.4", "--lambda", "2,0")
    assert code == 0
    cfg = RunConfig.from_json(saved.read_text())
    assert cfg.lam == [2, 0] and cfg.z == [0.4, 0.4]
    assert run("--config", str(saved), "character") == (0, first)
    # explicit flags override the file
    code, report = run_json("--config", str(saved), "character", "--lambda", "1,0")
    assert report["lambda"] == [1, 0]


def test_unknown_config_key(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"zz": 1})
    bad = tmp_path / "bad.json"
    bad.write_text('{"zz": 1}')
    assert run("--config", str(bad), "character")[0] == 2


def test_harmonicity_command():
    code, report = run_json("harmonicity", "--n", "2", "--z", "0.5", "--b", "1", "--samples", "2000", "--seed", "2")
    assert code == 0
    code, report = run_json("harmonicity", "--n", "2", "--z", "0.5", "--b", "1", "--alpha", "--samples", "2000")
    assert code == 0
    assert report["eigenvalue"] == pytest.approx(0.976553, abs=1e-6)
