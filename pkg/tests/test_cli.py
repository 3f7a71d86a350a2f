import json
from pathlib import Path

import pytest

from susyzeta import cli
from susyzeta.cbc import QuadratureError


def run(tmp_path, *args, label="a"):
    return cli.run([*args, "--outdir", str(tmp_path / "out"), "--label", label])


def out(tmp_path, sub, name, label="a"):
    return (tmp_path / "out" / sub / label / name).read_text()


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return [l.split(",") for l in lines]


def test_turning_points(tmp_path):
    z = tmp_path / "zeros.txt"
    z.write_text("14.134725141735\n21.022039638772\n25.010857580146\n30.424876125860\n"
                 "32.935061587739\n37.586178158826\n40.918719012147\n43.327073280915\n")
    assert run(tmp_path, "turning-points", "--zeros", str(z), "--n", "8") == 0
    data = rows(out(tmp_path, "turning-points", "turning_points.csv"))
    assert data[0] == ["j", "lambda", "x"]
    expected = [1.30083, 1.87866, 2.20626, 2.64243, 2.84142, 3.20489, 3.4613, 3.64459]
    assert [float(r[2]) for r in data[1:]] == pytest.approx(expected, abs=1e-5)


def test_cbc_ratio_single_level(tmp_path):
    assert run(tmp_path, "cbc-ratios", "--sigma", "0", "--n", "1", "--x", "1.30083") == 0
    data = rows(out(tmp_path, "cbc-ratios", "cbc_ratios.csv"))
    assert data[0] == ["j", "lambda", "x", "integral", "ratio"]
    assert float(data[1][4]) == pytest.approx(3.48049, abs=1e-5)


def test_fit_is_byte_reproducible(tmp_path):
    args = ["fit", "--n", "7", "--m", "7", "--sigma", "free", "--seed", "42", "--generations", "20"]
    assert run(tmp_path, *args, label="one") == 0
    assert run(tmp_path, *args, label="two") == 0
    for name in ("result.json", "history.csv", "cbc_ratios.csv"):
        assert out(tmp_path, "fit", name, "one") == out(tmp_path, "fit", name, "two")
    # only the config echo carries a timestamp
    a = json.loads(out(tmp_path, "fit", "config.json", "one"))
    assert "timestamp" in a and a["config_sha256"] == json.loads(out(tmp_path, "fit", "result.json", "one"))["meta"]["config_sha256"]


def test_artifacts_carry_version_and_hash(tmp_path):
    assert run(tmp_path, "replay", "--preset", "n10") == 0
    meta = json.loads(out(tmp_path, "replay", "result.json"))["meta"]
    assert meta["tool"] == "susyzeta" and meta["version"]
    first = out(tmp_path, "replay", "cbc_ratios.csv").splitlines()[0]
    assert first.startswith("# tool=susyzeta") and meta["config_sha256"] in first
    ssq = json.loads(out(tmp_path, "replay", "result.json"))["ssq"]
    assert ssq["total"] == pytest.approx(2.86609, rel=0.05)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[common]\nzeros =\n[turning-points]\nn = 3\n")
    cfg.write_text("[turning-points]\nn = 3\n")
    assert run(tmp_path, "turning-points", "--config", str(cfg), label="cfg") == 0
    assert len(rows(out(tmp_path, "turning-points", "turning_points.csv", "cfg"))) == 4
    assert run(tmp_path, "turning-points", "--config", str(cfg), "--n", "5", label="flag") == 0
    assert len(rows(out(tmp_path, "turning-points", "turning_points.csv", "flag"))) == 6
    echo = json.loads(out(tmp_path, "turning-points", "config.json", "flag"))
    assert echo["config"]["n"] == 5


def test_validation_failures_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("not an ini file\n")
    assert run(tmp_path, "turning-points", "--config", str(bad)) == 1
    bad.write_text("[turning-points]\nbogus = 1\n")
    assert run(tmp_path, "turning-points", "--config", str(bad)) == 1
    bad.write_text("[turning-points]\nn = many\n")
    assert run(tmp_path, "turning-points", "--config", str(bad)) == 1
    assert cli.run(["frobnicate"]) == 1
    assert run(tmp_path, "turning-points", "--n", "400") == 1
    assert run(tmp_path, "dominici", "--x-max", "0.25") == 1
    assert "error" in capsys.readouterr().err


def test_numerical_failure_exit_2(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise QuadratureError("not converged")

    monkeypatch.setattr(cli, "cbc_ratio_series", boom)
    assert run(tmp_path, "cbc-ratios", "--n", "2") == 2


def test_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert cli.resolve_config(["turning-points"])["threads"] == 2
    assert cli.resolve_config(["turning-points", "--threads", "3"])["threads"] == 3
    monkeypatch.setenv(cli.THREADS_ENV, "x")
    assert cli.run(["turning-points", "--outdir", str(tmp_path)]) == 1


@pytest.mark.parametrize(
    "args,artifact",
    [
        (["zeros", "--count", "5"], "zeros.txt"),
        (["zeros", "--count", "5", "--method", "ingest"], "zeros.csv"),
        (["weier", "--phases", "0.1,0.2,0.3", "--points", "21"], "weier.csv"),
        (["adjust", "--j", "1,2"], "adjust.csv"),
        (["iterate", "--n", "4", "--m", "4", "--gamma", "3", "--generations", "20"], "iterations.json"),
        (["analyze", "--kind", "rao"], "rao.json"),
        (["analyze", "--kind", "correlation", "--points", "64"], "correlation.json"),
        (["analyze", "--kind", "unfold"], "unfolded.csv"),
        (["identities"], "identities.json"),
        (["dominici", "--points", "11"], "dominici.csv"),
        (["fit", "--n", "4", "--m", "4", "--x-mode", "fixed_smooth", "--gamma", "3", "--weights", "1,0",
          "--generations", "20"], "result.json"),
    ],
)
def test_subcommands_smoke(tmp_path, args, artifact):
    assert run(tmp_path, *args) == 0
    assert out(tmp_path, args[0], artifact)


def test_residuals_from_result(tmp_path):
    assert run(tmp_path, "replay", "--preset", "n7-scaled") == 0
    res = tmp_path / "out" / "replay" / "a" / "result.json"
    assert run(tmp_path, "analyze", "--kind", "residuals", "--result", str(res)) == 0
    assert len(rows(out(tmp_path, "analyze", "residuals.csv"))) == 8


def test_example_config_parses(tmp_path):
    example = Path(__file__).resolve().parents[1] / "config.example.ini"
    assert cli.run(["identities", "--config", str(example), "--outdir", str(tmp_path)]) == 0
