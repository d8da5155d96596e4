import csv
import io
import json
import subprocess
import sys

import pytest

from drawdown_occupation.cli import COLUMNS, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERICAL, main

BM = {"type": "brownian", "mu": 1.0, "sigma": 2 ** 0.5}
CLM = {"type": "cramer_lundberg_exp", "mu": 2.0, "lambda": 1.0, "beta": 1.0}
ONE_STEP = {"type": "one_step", "q": 1.0, "p": 0.0, "a": 0.5}


def write_config(tmp_path, **cfg):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.mark.parametrize("command,extra", [
    ("scale", ["--points", "5"]),
    ("omega-scale", ["--stride", "500"]),
    ("exit", ["--x", "1", "--b", "2"]),
    ("table", ["--b", "2", "--points", "5"]),
    ("gerber-shiu", ["--x", "1", "--b", "2", "--z-points", "2", "--y-points", "3"]),
    ("mc-validate", ["--x", "1", "--b", "2", "--paths", "200"]),
])
def test_headers_are_stable(tmp_path, command, extra):
    cfg = write_config(tmp_path, model=CLM, omega=ONE_STEP)
    code, text = run([command, "--config", cfg, *extra])
    assert code == 0
    table = rows(text)
    assert table[0] == COLUMNS[command]
    assert len(table) > 1 and all(len(r) == len(table[0]) for r in table)


def test_golden_headers():
    assert COLUMNS["exit"] == ["x", "b", "c", "up", "down", "residual"]
    assert COLUMNS["scale"] == ["x", "W", "Wprime", "Z"]
    assert COLUMNS["omega-scale"] == ["x", "y", "W_omega", "W2", "Zhat", "Zhat1", "Zhat2", "dual_residual"]
    assert COLUMNS["table"] == ["x", "up", "down"]
    assert COLUMNS["mc-validate"][:2] == ["engine", "n"]


def test_exit_classical_row(tmp_path):
    cfg = write_config(tmp_path, model=BM)
    code, text = run(["exit", "--config", cfg, "--x", "0.5", "--b", "1"])
    assert code == 0
    row = dict(zip(*rows(text)))
    assert float(row["up"]) == pytest.approx(0.622459, abs=1e-6)
    assert row["up"] == "0.622459331202"      # 12 significant digits


def test_exit_at_barrier(tmp_path):
    cfg = write_config(tmp_path, model=CLM, omega=ONE_STEP, task={"x": 2.0, "b": 2.0})
    code, text = run(["exit", "--config", cfg])
    row = dict(zip(*rows(text)))
    assert (row["up"], row["down"]) == ("1", "0")


def test_flags_override_task(tmp_path):
    cfg = write_config(tmp_path, model=BM, task={"x": 0.2, "b": 1.0})
    _, text = run(["exit", "--config", cfg, "--x", "0.5"])
    assert dict(zip(*rows(text)))["x"] == "0.5"


def test_mc_validate_reproducible(tmp_path):
    cfg = write_config(tmp_path, model=CLM, omega=ONE_STEP, task={"x": 1.0, "b": 2.0})
    argv = ["mc-validate", "--config", cfg, "--paths", "3000", "--seed", "42"]
    assert run(argv) == run(argv)
    assert run(argv)[1] == run(argv + ["--workers", "2"])[1]


def test_brownian_mc_reports_two_steps(tmp_path):
    cfg = write_config(tmp_path, model=BM, task={"x": 0.5, "b": 1.0})
    _, text = run(["mc-validate", "--config", cfg, "--paths", "100", "--dt", "1e-3"])
    engines = [r[0] for r in rows(text)[1:]]
    assert engines == ["euler_brownian_dt=0.001", "euler_brownian_dt=0.00025"]


def test_gerber_shiu_brownian_zero(tmp_path):
    cfg = write_config(tmp_path, model=BM)
    code, text = run(["gerber-shiu", "--config", cfg, "--x", "0.5", "--b", "1", "--z-points", "2",
                      "--y-points", "2"])
    assert code == 0
    assert {r[-1] for r in rows(text)[1:]} == {"0"}


@pytest.mark.parametrize("cfg,argv,code", [
    ({"model": BM, "extra": 1}, ["--x", "0.5", "--b", "1"], EXIT_CONFIG),
    ({"model": {"type": "brownian", "mu": 1}}, ["--x", "0.5", "--b", "1"], EXIT_CONFIG),
    ({"model": BM, "task": {"bogus": 1}}, ["--x", "0.5", "--b", "1"], EXIT_CONFIG),
    ({"model": BM}, ["--x", "0.5"], EXIT_CONFIG),
    ({"model": BM}, ["--x", "1.5", "--b", "1"], EXIT_DOMAIN),
    ({"model": {"type": "brownian", "mu": 1, "sigma": -1}}, ["--x", "0.5", "--b", "1"], EXIT_DOMAIN),
    ({"model": BM, "omega": {"type": "constant", "q": 1e6}}, ["--x", "0.5", "--b", "5"], EXIT_NUMERICAL),
])
def test_exit_codes(tmp_path, capsys, cfg, argv, code):
    path = write_config(tmp_path, **cfg)
    got, text = run(["exit", "--config", path, *argv])
    assert got == code
    assert text == ""
    assert capsys.readouterr().err


def test_unparseable_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["exit", "--config", str(path)])[0] == EXIT_CONFIG
    assert run(["exit", "--config", str(tmp_path / "missing.json")])[0] == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, model=BM)
    res = subprocess.run([sys.executable, "-m", "drawdown_occupation", "exit", "--config", cfg, "--x", "0.5",
                          "--b", "1"], capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "x,b,c,up,down,residual"
