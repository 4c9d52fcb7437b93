import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from bds import __version__
from bds.cli import RunConfig, build_parser, config_from_args, main, run
from bds.moments import raw_moments
from bds.params import ShapeParams


def _main(argv, capsys):
    status = main(argv)
    out, err = capsys.readouterr()
    return status, out, err


def test_eval_matches_raw_moment(capsys):
    status, out, _ = _main(["eval", "--n", "32", "--gamma", "1", "--alpha", "1", "--beta", "2", "--f", "t2", "--x", "1.0"], capsys)
    assert status == 0
    doc = json.loads(out)
    exact = raw_moments(ShapeParams.of(32, 1, 1, 2), 2)[2](1)
    assert doc["result"]["rows"][0]["value"] == pytest.approx(float(exact), rel=1e-9)
    assert doc["version"] == __version__
    assert doc["config"]["params"] == {"alpha": "1", "beta": "2", "gamma": "1", "n": "32"}


def test_moments_coefficients(capsys):
    status, out, _ = _main(["moments", "--n", "16", "--gamma", "1", "--alpha", "0", "--beta", "0", "--max-m", "2"], capsys)
    assert status == 0
    doc = json.loads(out)
    assert doc["result"]["table"]["central"][2] == ["0", "2/15", "2/15"]
    assert doc["result"]["dual_path_equal"] is True


def test_selftest_passes(capsys):
    status, out, _ = _main(["selftest"], capsys)
    assert status == 0
    doc = json.loads(out)
    assert doc["result"]["passed"] and all(doc["result"]["checks"].values())


def test_recurrence_pole_exit_code(capsys):
    status, _, err = _main(["moments", "--n", "2", "--gamma", "1", "--max-m", "5"], capsys)
    assert status == 2
    assert "recurrence pole" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--f", "nope"],
    ["eval", "--n", "-1"],
    ["eval", "--alpha", "3", "--beta", "1"],
    ["eval", "--rel-tol", "1e-15"],
    ["voronovskaja", "--n-grid", "128", "64", "256"],
    ["deriv", "--f", "spline_c1", "--r", "2"],
])
def test_validation_exit_code(argv, capsys):
    status, out, err = _main(argv, capsys)
    assert status == 2 and out == "" and err.startswith("bds:")


def test_nonconvergence_exit_code(capsys):
    status, _, err = _main(["eval", "--f", "sin", "--n", "3", "--x", "1", "--max-refinements", "1"], capsys)
    assert status == 3 and "did not converge" in err


def test_csv_columns(capsys):
    status, out, _ = _main(["eval", "--n", "32", "--f", "t2", "--x", "1", "2", "--format", "csv"], capsys)
    assert status == 0
    assert "\r\n" in out
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "x", "value", "target", "abs_err", "rel_err", "rate"]
    assert len(rows) == 3 and rows[1][-1] == ""
    assert float(rows[2][2]) == pytest.approx(float(rows[2][3]), rel=1e-12)


def test_csv_rejected_for_structured_commands(capsys):
    status, _, _ = _main(["moments", "--format", "csv"], capsys)
    assert status == 2


def test_voronovskaja_csv_rate(capsys):
    status, out, _ = _main(["voronovskaja", "--f", "t2", "--x", "1", "--n-grid", "64", "128", "256", "512", "--format", "csv"], capsys)
    assert status == 0
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert len(rows) == 4 and all(float(r[3]) == 4.0 for r in rows)
    assert float(rows[0][6]) == pytest.approx(-1, abs=0.2)


def test_determinism_and_rerun(tmp_path, capsys):
    argv = ["convergence", "--f", "exp_neg", "--r", "1", "--x", "1/2", "--n-grid", "64", "128", "256"]
    _, first, _ = _main(argv, capsys)
    _, second, _ = _main(argv, capsys)
    assert first == second
    report = tmp_path / "report.json"
    report.write_text(first)
    out_path = tmp_path / "again.json"
    assert main(["rerun", str(report), "--output", str(out_path)]) == 0
    assert out_path.read_text() == first


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "m.json"
    status, out, _ = _main(["moments", "--n", "16", "--max-m", "2", "--output", str(dest)], capsys)
    assert status == 0 and out == ""
    assert json.loads(dest.read_text())["config"]["output_path"] == str(dest)


def test_runconfig_json_roundtrip():
    args = build_parser().parse_args(["errorbound", "--n", "129/2", "--gamma", "1/2", "--f", "sin", "--r", "1"])
    cfg = config_from_args(args)
    assert cfg.params.n == Fraction(129, 2)
    again = RunConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again == cfg
    assert run(cfg)[1] == run(again)[1]


def test_jobs_environment_override(tmp_path):
    argv = [sys.executable, "-m", "bds.cli", "voronovskaja", "--f", "exp_neg", "--n-grid", "64", "128", "256"]
    env_outputs = []
    for jobs in ("1", "2"):
        proc = subprocess.run(argv, capture_output=True, text=True, env={**__import__("os").environ, "BDS_JOBS": jobs})
        assert proc.returncode == 0, proc.stderr
        env_outputs.append(proc.stdout)
    assert env_outputs[0] == env_outputs[1]
