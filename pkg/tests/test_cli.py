import json
import math
import subprocess
import sys

import pytest

from genericdim.cli import EXIT_CONFIG, EXIT_SUPPORT, WORKERS_ENV, main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def results(out):
    return json.loads((out / "report.json").read_text())["results"]


def test_pressure_bernoulli_is_zero(tmp_path):
    code, out = run(tmp_path, "pressure", "--potential", "bernoulli:.5,.3,.2", "--N", "3", "--d", "1,2")
    assert code == 0
    assert results(out)["P_hat"] == pytest.approx(0.0, abs=1e-14)
    assert (out / "pressure.csv").read_text().startswith("N,d,P_hat")


def test_pressure_gauss_table(tmp_path):
    code, out = run(tmp_path, "pressure", "--potential", "gauss", "--N", "250,1000", "--d", "2")
    assert code == 0
    trend = results(out)["trend"]
    assert abs(trend[-1]) <= 1e-2 and abs(trend[-1]) < abs(trend[0])


@pytest.mark.parametrize("spec", ["bernoulli:.5,x", "markov:.9,.1", "nonsense", "bernoulli:.5,-1"])
def test_malformed_spec_exits_without_output(tmp_path, spec, capsys):
    code, out = run(tmp_path, "pressure", "--potential", spec)
    assert code == EXIT_CONFIG and not out.exists()
    assert "config error" in capsys.readouterr().err


def test_dim_equal_measures(tmp_path):
    spec = "markov:.9,.1;.5,.5"
    code, out = run(tmp_path, "dim", "--mu", spec, "--nu", spec, "--k", "6", "--N-cap", "2")
    assert code == 0 and results(out)["value"] == 1.0


def test_dim_periodic_mu_gives_alpha(tmp_path):
    code, out = run(tmp_path, "dim", "--mu", "periodic:1", "--nu", "zeta:2", "--k", "4", "--N-cap", "10")
    r = results(out)
    assert code == 0 and r["value"] == pytest.approx(0.5, abs=0.01) and r["branch"] == "alpha"


def test_dim_support_mismatch(tmp_path):
    code, out = run(tmp_path, "dim", "--mu", "bernoulli:.5,.5", "--nu", "bernoulli:1,0", "--k", "2", "--N-cap", "2")
    assert code == EXIT_SUPPORT and not out.exists()


def test_cfdim_golden(tmp_path):
    code, out = run(tmp_path, "cfdim", "--ell", "golden")
    assert code == 0 and results(out)["value"] == 0.5


def test_seed_then_verify(tmp_path):
    code, seed_out = run(tmp_path, "seed", "--mu", "markov:.5,.3,.2;.2,.5,.3;.3,.2,.5", "--horizon", "20000",
                         "--horizons", "1000,10000", name="seed")
    assert code == 0 and results(seed_out)["cap_violation"] is None
    code, out = run(tmp_path, "verify", "--mu", "markov:.5,.3,.2;.2,.5,.3;.3,.2,.5", "--stream",
                    str(seed_out / "stream.txt"), "--horizons", "1000,10000,19000", name="verify")
    assert code == 0
    r = results(out)
    assert r["envelope_decreasing"] and r["d_star"][-1] < 0.05
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "horizon,d_star,tail" and len(lines) == 4


def test_cantor_ystar(tmp_path):
    code, out = run(tmp_path, "cantor", "--kind", "ystar", "--mu", "markov:.9,.1;.5,.5", "--nu", "bernoulli:.3,.7",
                    "--count", "3", "--depth", "5000")
    r = results(out)
    assert code == 0 and r["min_proxy"] >= r["target"] - 0.05


def test_replay_is_byte_identical(tmp_path):
    args = ["seed", "--mu", "markov:.9,.1;.5,.5", "--horizon", "5000", "--horizons", "1000,5000", "--seed", "9"]
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, name="b")
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_report_echoes_config(tmp_path):
    _, out = run(tmp_path, "pressure", "--potential", "gauss", "--N", "100", "--d", "2", "--seed", "3")
    config = json.loads((out / "report.json").read_text())["config"]
    assert config["N"] == "100" and config["d"] == "2" and config["seed"] == 3
    assert "config.seed = 3" in (out / "report.txt").read_text()


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"potential": "bernoulli:.25,.75", "N": [2], "d": "1"}))
    code, out = run(tmp_path, "pressure", "--potential", "gauss", "--config", str(cfg))
    r = json.loads((out / "report.json").read_text())
    assert code == 0 and r["config"]["potential"] == "bernoulli:.25,.75" and r["results"]["N"] == 2


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"potential": "gauss",\n "N": }')
    assert run(tmp_path, "pressure", "--config", str(bad))[0] == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"colour": 3}')
    assert run(tmp_path, "pressure", "--config", str(unknown))[0] == EXIT_CONFIG
    assert "colour" in capsys.readouterr().err
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"k": "many"}')
    assert run(tmp_path, "dim", "--config", str(wrong))[0] == EXIT_CONFIG
    assert run(tmp_path, "pressure", "--config", str(tmp_path / "missing.json"))[0] == EXIT_CONFIG


@pytest.mark.parametrize("args", [["dim", "--mu", "bernoulli:.5,.5", "--nu", "bernoulli:.5,.5", "--k", "0"],
                                  ["pressure", "--s", "0.5"],
                                  ["dim", "--nu", "zeta:2"]])
def test_invalid_values(tmp_path, args):
    assert run(tmp_path, *args)[0] == EXIT_CONFIG


def test_workers_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    _, out = run(tmp_path, "pressure", "--potential", "bernoulli:.5,.5", "--N", "2", "--d", "1")
    assert json.loads((out / "report.json").read_text())["config"]["workers"] == 3
    monkeypatch.setenv(WORKERS_ENV, "lots")
    assert run(tmp_path, "pressure", name="again")[0] == EXIT_CONFIG


def test_module_entry_point_prints_report():
    proc = subprocess.run([sys.executable, "-m", "genericdim", "cfdim", "--ell", "golden"],
                          capture_output=True, text=True, check=True)
    values = dict(line.split(" = ", 1) for line in proc.stdout.splitlines())
    assert math.isclose(float(values["results.value"]), 0.5)
