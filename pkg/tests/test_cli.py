import csv
import io
import json

import numpy as np
import pytest

from spinxxz.cli import (
    EXIT_CHECK, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_VALIDATION, OUTPUT_DIR_ENV, build_config, main,
    parse_complex, parse_config, run_check,
)
from spinxxz.errors import ValidationError

TABLE1 = ["--param", "s=1", "--param", "N=2", "--param", "p=3", "--param", "beta_minus=0.767",
          "--param", "beta_plus=0.598", "--param", "theta_minus=0.573", "--param", "theta_plus=0.573"]


@pytest.fixture(autouse=True)
def no_env_dir(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture(scope="module")
def table1_bundle(tmp_path_factory):
    path = tmp_path_factory.mktemp("bethe") / "t1.json"
    code = main(["bethe", *TABLE1, "--param", "case=I", "--out", str(path)])
    return code, path


@pytest.mark.parametrize("text,value", [
    ("0.3", 0.3), ("0.854i", 0.854j), ("-1.5e-2+2i", -0.015 + 2j), ("1-0.5j", 1 - 0.5j),
    ("i", 1j), ("-i", -1j), (" 2 + 3i ", 2 + 3j), (".5", 0.5),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "1+2", "i2"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValidationError):
        parse_complex(text)


def test_parse_config_comments_and_spacing():
    assert parse_config("# header\ns = 1\n p=3 # odd\n\nalpha_plus = 0.487i\n") == {
        "s": "1", "p": "3", "alpha_plus": "0.487i"}
    with pytest.raises(ValidationError):
        parse_config("just words")


def test_build_config_validation():
    cfg = build_config("verify", {"s": "3/2", "N": "2", "p": "5", "tol.ybe": "1e-9"})
    assert cfg.params.two_s == 3 and cfg.tol("ybe") == 1e-9 and cfg.tol("bybe") == 1e-10
    for values in ({"s": "1/3"}, {"N": "two"}, {"bogus": "1"}, {"tol.nope": "1"}, {"tol.ybe": "-1"},
                   {"samples": "0"}, {"output_format": "xml"}):
        with pytest.raises(ValidationError):
            build_config("verify", values)
    with pytest.raises(ValidationError):
        build_config("bethe", {"s": "1", "N": "2", "p": "3"})


def test_verify_exit_ok(capsys):
    assert main(["verify", "--param", "s=1", "--param", "samples=4"]) == EXIT_OK
    bundle = json.loads(capsys.readouterr().out)
    assert {c["name"] for c in bundle["checks"]} >= {"ybe", "bybe", "fusion", "functional_relation"}
    assert all(c["pass"] for c in bundle["checks"])


def test_verify_tight_tolerance_fails(capsys):
    assert main(["verify", "--param", "samples=2", "--tol", "ybe=1e-30"]) == EXIT_CHECK
    assert "FAIL ybe" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["bethe", "--param", "p=4", "--param", "case=I"],
    ["bethe", "--param", "N=3", "--param", "s=1/2", "--param", "case=I"],
    ["bethe", "--param", "s=1"],
    ["bethe", *TABLE1, "--param", "case=II"],
    ["verify", "--param", "alpha_plus=oops"],
    ["verify", "--tol", "ybe"],
    ["verify", "--config", "/nonexistent/cfg.txt"],
])
def test_validation_exit_code(argv, capsys):
    assert main(argv) == EXIT_VALIDATION
    assert capsys.readouterr().err.startswith("error:")


def test_verify_even_p_skips_odd_only_suites(capsys):
    assert main(["verify", "--param", "p=4", "--param", "samples=2"]) == EXIT_OK
    bundle = json.loads(capsys.readouterr().out)
    assert bundle["skipped"] == ["functional_relation", "f0_identity"]
    assert "functional_relation" not in {c["name"] for c in bundle["checks"]}


def test_p_even_message(capsys):
    main(["bethe", "--param", "s=1", "--param", "p=4", "--param", "case=I"])
    assert "p must be odd" in capsys.readouterr().err


def test_bethe_bundle_roundtrip(table1_bundle, capsys):
    code, path = table1_bundle
    assert code == EXIT_OK
    bundle = json.loads(path.read_text())
    assert len(bundle["bethe"]) == 9
    for sol in bundle["bethe"]:
        assert len(sol["roots1"]) == 4 and len(sol["roots2"]) == 3
        assert {r["source"] for r in sol["energies"]} == {"diagonalization", "derivative", "bethe"}
    assert main(["check", str(path)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert all(r["pass"] for r in report["checks"])


def test_check_detects_tightened_tolerance(table1_bundle, capsys):
    _, path = table1_bundle
    assert main(["check", str(path), "--tol", "energy_agreement=1e-30"]) == EXIT_CHECK


def test_check_detects_tampered_residual(table1_bundle, tmp_path):
    _, path = table1_bundle
    bundle = json.loads(path.read_text())
    bundle["checks"][0]["residual"] = 1.0
    report, code = run_check(bundle)
    assert code == EXIT_CHECK and not report[0]["pass"]


def test_check_rejects_bad_bundle(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", str(bad)]) == EXIT_VALIDATION
    bad.write_text("[1, 2]")
    assert main(["check", str(bad)]) == EXIT_VALIDATION


def test_bethe_deterministic(table1_bundle, tmp_path):
    _, path = table1_bundle
    again = tmp_path / "again.json"
    main(["bethe", *TABLE1, "--param", "case=I", "--out", str(again)])
    a, b = json.loads(path.read_text()), json.loads(again.read_text())
    a.pop("timings"), b.pop("timings")
    assert a == b


def test_nonconvergence_exit_code():
    assert main(["bethe", *TABLE1, "--param", "case=I", "--tol", "bae=1e-30"]) == EXIT_NONCONVERGENCE


def test_roots_csv_schema(tmp_path):
    out = tmp_path / "roots.csv"
    assert main(["bethe", *TABLE1, "--param", "case=I", "--format", "csv", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == ["level", "root_index", "re", "im", "which_Q"]
    assert len(rows) == 9 * 7
    assert sum(r["which_Q"] == "Q1" for r in rows) == 36
    assert all(np.isfinite(float(r["re"])) and np.isfinite(float(r["im"])) for r in rows)


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["spectrum", "--param", "s=1", "--format", "csv"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO((tmp_path / "spectrum.csv").read_text())))
    assert len(rows) == 9 and rows[0]["kind"] == "energy"
    assert main(["verify", "--param", "samples=2", "--out", "sub/v.json"]) == EXIT_OK
    assert (tmp_path / "sub" / "v.json").exists()


def test_config_file_with_param_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("s = 1/2\nN = 2\np = 3 # root of unity\nu = 0.2+0.3i\n")
    assert main(["spectrum", "--config", str(cfg), "--param", "p=5"]) == EXIT_OK
    bundle = json.loads(capsys.readouterr().out)
    assert bundle["config"]["p"] == 5
    assert len(bundle["spectra"]) == 4


@pytest.mark.parametrize("table,first", [("table1", -5.6483), ("table2", -6.07709)])
def test_reproduce(table, first, tmp_path):
    out = tmp_path / "r.json"
    assert main(["reproduce", table, "--out", str(out)]) == EXIT_OK
    bundle = json.loads(out.read_text())
    assert len(bundle["comparison"]) == 9
    assert abs(bundle["comparison"][0]["E"] - first) <= 5e-4


def test_bethe_spin_three_halves(tmp_path):
    out = tmp_path / "s32.json"
    assert main(["bethe", "--param", "s=3/2", "--param", "case=I", "--param", "beta_minus=0.767",
                 "--param", "beta_plus=0.598", "--param", "theta_minus=0.573",
                 "--param", "theta_plus=0.573", "--out", str(out)]) == EXIT_OK
    assert len(json.loads(out.read_text())["bethe"]) == 16
