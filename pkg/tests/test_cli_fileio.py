import json
import subprocess
import sys

import numpy as np
import pytest

from wiks import (
    BivariateNormal,
    CalibrationConfig,
    DPPrior,
    LogNormal,
    Normal,
    ParseError,
    PowerComplement,
    SeedSpec,
    TabulatedCDF,
    UniformWeight,
    UsageError,
    calibrate_wiks_null,
    classical_ks_test,
)
from wiks.calibration import PowerRow, PowerTable
from wiks.cli import main
from wiks.fileio import (
    model_from_dict,
    model_to_dict,
    parse_model,
    parse_sample_text,
    parse_samples,
    read_calibration,
    read_power_table,
    read_report,
    write_calibration,
    write_power_table,
    write_report,
)

# File parsing -------------------------------------------------------------


def test_parse_univariate():
    assert np.array_equal(parse_sample_text("1.0\n2.0\n"), [1.0, 2.0])


def test_parse_bivariate_with_header():
    out = parse_sample_text("x,y\n0,0\n1,1\n")
    assert np.array_equal(out, [[0.0, 0.0], [1.0, 1.0]])


def test_parse_blank_lines_ignored():
    assert np.array_equal(parse_sample_text("\n1\n\n2\n"), [1.0, 2.0])


@pytest.mark.parametrize("text,line", [
    ("1.0\n1,2\n", 2),
    ("1\n2\nabc\n", 3),
    ("1,2\n3,4\n5\n", 3),
    ("1,2,3\n", 1),
    ("1\nnan\n", 2),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(ParseError, match=f"line {line}"):
        parse_sample_text(text)


def test_parse_empty():
    with pytest.raises(ParseError):
        parse_sample_text("value\n")


def test_parse_samples_reports_path(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1\nx\n")
    with pytest.raises(ParseError, match="bad.csv"):
        parse_samples(f)


@pytest.mark.parametrize("text,model", [
    ("normal", Normal(0, 1)),
    ("normal:1,2", Normal(1, 2)),
    ("lognormal:0,1", LogNormal(0, 1)),
])
def test_parse_model(text, model):
    assert parse_model(text) == model


@pytest.mark.parametrize("text", ["cauchy:0,1", "normal:0,1,2", "normal:a,b"])
def test_parse_model_errors(text):
    with pytest.raises(UsageError):
        parse_model(text)


@pytest.mark.parametrize("obj", [
    Normal(1, 2),
    LogNormal(0, 1),
    PowerComplement(3.0),
    UniformWeight(),
    DPPrior(2.0, Normal(0, 3)),
    DPPrior(1.0, (Normal(), Normal(1, 2))),
    BivariateNormal((0.0, 1.0), ((1.0, 0.2), (0.2, 1.0))),
], ids=repr)
def test_model_dict_round_trip(obj):
    back = model_from_dict(json.loads(json.dumps(model_to_dict(obj))))
    assert back == obj


def test_tabulated_dict_round_trip():
    spec = TabulatedCDF([0, 0.5, 1], [0, 0.8, 1])
    back = model_from_dict(model_to_dict(spec))
    assert np.array_equal(back.values, spec.values)


def test_calibration_file_round_trip(tmp_path):
    res = calibrate_wiks_null(CalibrationConfig(n=8, m=9, replicates=3), draws=10,
                              seed=SeedSpec(2, (4,)))
    path = tmp_path / "cal.json"
    write_calibration(path, res)
    back = read_calibration(path)
    assert back.threshold == res.threshold
    assert np.array_equal(back.values, res.values)
    assert back.config == res.config
    assert back.seed == res.seed
    assert back.settings["prior"] == res.settings["prior"]


def test_report_and_power_table_round_trip(tmp_path):
    rep = classical_ks_test([0.0, 1.0, 2.0], [0.5, 3.0])
    write_report(tmp_path / "r.json", [rep], {"seed": 1})
    assert read_report(tmp_path / "r.json") == [rep]
    table = PowerTable([PowerRow("1", 0.5, "WIKS", 0.25, 4, 0.2165)])
    write_power_table(tmp_path / "p.csv", table)
    assert read_power_table(tmp_path / "p.csv") == table


# Command line -------------------------------------------------------------


@pytest.fixture()
def samples(tmp_path):
    rng = np.random.default_rng(0)

    def write(name, values):
        path = tmp_path / name
        path.write_text("value\n" + "\n".join(repr(float(v)) for v in values) + "\n")
        return str(path)

    return {
        "a": write("a.csv", rng.normal(size=50)),
        "far": write("far.csv", rng.normal(3, 1, size=50)),
        "dir": tmp_path,
    }


FAST = ["--replicates", "200", "--s-draws", "200"]


def test_cli_rejects_shifted_samples(samples, capsys):
    out = samples["dir"] / "report.json"
    rc = main(["test", "--x", samples["a"], "--y", samples["far"], "--out", str(out)] + FAST)
    assert rc == 0
    data = json.loads(out.read_text())
    wiks_row = data["reports"][0]
    assert wiks_row["method"] == "WIKS" and wiks_row["decision"] == "reject_H0"
    assert {r["method"] for r in data["reports"]} == {"WIKS", "KS", "WILCOX"}
    assert "reject_H0" in capsys.readouterr().out


def test_cli_accepts_identical_files(samples):
    copy = samples["dir"] / "a_copy.csv"
    copy.write_bytes(open(samples["a"], "rb").read())
    out = samples["dir"] / "same.json"
    rc = main(["test", "--x", samples["a"], "--y", str(copy), "--out", str(out)] + FAST)
    assert rc == 0
    assert json.loads(out.read_text())["reports"][0]["decision"] == "accept_H0"


def test_cli_explicit_threshold(samples):
    out = samples["dir"] / "t.json"
    rc = main(["test", "--x", samples["a"], "--y", samples["far"], "--threshold", "0.999999",
               "--s-draws", "100", "--out", str(out)])
    assert rc == 0
    assert json.loads(out.read_text())["reports"][0]["threshold"] == 0.999999


def test_cli_parse_failure_exit_2(samples, capsys):
    bad = samples["dir"] / "bad.csv"
    bad.write_text("1.0\n2.0\noops\n")
    rc = main(["test", "--x", str(bad), "--y", samples["a"], "--threshold", "0.7"])
    assert rc == 2
    assert "line 3" in capsys.readouterr().err


def test_cli_missing_file_exit_2(samples):
    assert main(["test", "--x", "/nonexistent.csv", "--y", samples["a"],
                 "--threshold", "0.7"]) == 2


def test_cli_usage_errors_exit_64(samples, tmp_path):
    assert main([]) == 64
    assert main(["frobnicate"]) == 64
    assert main(["power", "--scenarios", "", "--methods", "KS"]) == 64
    assert main(["power", "--scenarios", "12", "--methods", "KS"]) == 64
    assert main(["calibrate", "--alpha", "1.5", "--replicates", "2"]) == 64
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"no_such_option": 1}))
    assert main(["calibrate", "--config", str(cfg)]) == 64


def test_cli_resource_cap_exit_3(monkeypatch, capsys):
    monkeypatch.setenv("WIKS_MAX_BUDGET", "100")
    assert main(["calibrate", "--replicates", "50", "--s-draws", "50"]) == 3
    assert "reduce" in capsys.readouterr().err


def test_cli_calibrate_quantile_rule(tmp_path):
    out = tmp_path / "cal.json"
    rc = main(["calibrate", "--alpha", "0.5", "--replicates", "2", "--s-draws", "50",
               "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["threshold"] == min(data["values"])


def test_cli_calibrate_byte_identical(tmp_path):
    args = ["calibrate", "--replicates", "20", "--s-draws", "50", "--seed", "9"]
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert main(args + ["--out", str(c), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_cli_calibrate_near_published_cutoff(tmp_path):
    out = tmp_path / "cal.json"
    assert main(["calibrate", "--replicates", "300", "--s-draws", "300", "--seed", "2024",
                 "--out", str(out)]) == 0
    assert abs(json.loads(out.read_text())["threshold"] - 0.727) <= 0.05


def test_cli_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"replicates": 3, "s-draws": 20, "alpha": 0.5}))
    out = tmp_path / "cal.json"
    assert main(["calibrate", "--config", str(cfg), "--replicates", "4",
                 "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["values"]) == 4
    assert data["config"]["alpha"] == 0.5
    assert data["settings"]["draws"] == 20


def test_cli_z_quantile_mode(tmp_path):
    out = tmp_path / "z.json"
    assert main(["calibrate", "--mode", "z_quantile", "--replicates", "500",
                 "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["mode"] == "z_quantile"
    assert 0.15 < data["threshold"] < 0.4


def test_cli_power_csv(tmp_path):
    out = tmp_path / "p.csv"
    rc = main(["power", "--scenarios", "1,5", "--thetas", "1,2", "--methods", "KS,WILCOX",
               "--reps", "50", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "scenario,theta,method,power,reps,mc_se"
    assert len(lines) == 1 + 2 * 2 * 2


def test_cli_power_with_wiks_and_threshold(tmp_path):
    out = tmp_path / "p.csv"
    rc = main(["power", "--scenarios", "1", "--thetas", "0,3", "--methods", "WIKS",
               "--reps", "10", "--s-draws", "50", "--threshold", "0.73", "--out", str(out)])
    assert rc == 0
    table = read_power_table(out)
    assert table.rows[-1].power == 1.0


def test_cli_bivariate_test(tmp_path):
    rng = np.random.default_rng(3)
    fx, fy = tmp_path / "x.csv", tmp_path / "y.csv"
    np.savetxt(fx, rng.normal(size=(30, 2)), delimiter=",")
    np.savetxt(fy, rng.normal(2, 1, size=(30, 2)), delimiter=",")
    out = tmp_path / "r.json"
    assert main(["test", "--x", str(fx), "--y", str(fy), "--replicates", "40",
                 "--s-draws", "50", "--out", str(out)]) == 0
    reports = json.loads(out.read_text())["reports"]
    assert [r["method"] for r in reports] == ["WIKS"]
    assert reports[0]["decision"] == "reject_H0"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wiks", "power", "--scenarios", ""],
                          capture_output=True, text=True)
    assert proc.returncode == 64
    assert "scenarios" in proc.stderr


def test_cli_power_byte_identical_across_workers(tmp_path):
    args = ["power", "--scenarios", "1,B1", "--thetas", "0,0.5", "--reps", "6",
            "--methods", "WIKS", "--replicates", "20", "--s-draws", "20", "--n", "20",
            "--m", "20", "--seed", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
