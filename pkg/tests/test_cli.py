import json
import math
import subprocess
import sys

import pytest
import yaml

from oqs_thermo.cli import EXIT_CONFIG, EXIT_OK, EXIT_UNSTABLE, run


def _run(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _body(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def _header(text):
    return dict(line[2:].split(": ", 1) for line in text.splitlines() if line.startswith("# ") and ": " in line)


def test_energy_rows_and_header(capsys):
    code, out, _ = _run(["energy", "--beta", "1", "2", "--gamma", "0.2"], capsys)
    assert code == EXIT_OK
    head = _header(out)
    assert head["command"] == "energy" and head["seed"] == "none" and len(head["config_sha256"]) == 64
    body = _body(out)
    cols = body[0].split(",")
    assert cols == ["beta", "energy", "lambda", "backend"]
    rows = [dict(zip(cols, r.split(","))) for r in body[1:]]
    assert {r["backend"] for r in rows} == {"quadrature", "closed_form", "conventional"}
    for r in rows:
        if r["beta"] == "1" and r["backend"] != "conventional":
            assert abs(float(r["energy"]) - 1.246556423482199) < 1e-9


def test_rerun_is_byte_identical(capsys):
    argv = ["heat-capacity", "--n", "2", "--sigma", "0.5", "--beta", "1"]
    assert _run(argv, capsys)[1] == _run(argv, capsys)[1]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = {"network": {"gamma": 0.5}, "bath": {"beta": [0.5]}}
    ypath = tmp_path / "run.yaml"
    ypath.write_text(yaml.safe_dump(cfg))
    jpath = tmp_path / "run.json"
    jpath.write_text(json.dumps(cfg))
    a = _run(["closed-form", "--config", str(ypath)], capsys)[1]
    b = _run(["closed-form", "--config", str(jpath)], capsys)[1]
    assert a == b
    row = _body(a)[1].split(",")
    assert abs(float(row[1]) - 2.348613334682197) < 1e-10
    c = _run(["closed-form", "--config", str(ypath), "--gamma", "0.2"], capsys)[1]
    assert _header(c)["config_sha256"] != _header(a)["config_sha256"]
    assert abs(float(_body(c)[1].split(",")[1]) - 2.348613334682197) > 0.1


def test_temperature_flag(capsys):
    a = _run(["closed-form", "--temp", "0.5"], capsys)[1]
    b = _run(["closed-form", "--beta", "2"], capsys)[1]
    assert _body(a)[1:] == _body(b)[1:]


def test_output_file(tmp_path, capsys):
    out = tmp_path / "e.csv"
    code, stdout, _ = _run(["energy", "--beta", "1", "--out", str(out)], capsys)
    assert code == EXIT_OK and stdout == ""
    assert out.read_text().startswith("# oqs-thermo")


@pytest.mark.parametrize(
    "argv",
    [
        ["energy", "--gamma", "-1"],
        ["energy", "--omega-p", "0"],
        ["sweep", "--parameter", "colour"],
        ["energy", "--beta", "-2"],
        ["closed-form", "--n", "2"],
    ],
)
def test_config_errors(argv, capsys):
    assert _run(argv, capsys)[0] == EXIT_CONFIG


def test_bad_flag_exits_with_config_code(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["energy", "--no-such-flag"])
    assert exc.value.code == EXIT_CONFIG


def test_missing_config_file(tmp_path, capsys):
    assert _run(["energy", "--config", str(tmp_path / "absent.yaml")], capsys)[0] == EXIT_CONFIG


def test_bad_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("OQS_THREADS", "many")
    assert _run(["energy"], capsys)[0] == EXIT_CONFIG


def test_stability_command(capsys):
    code, out, err = _run(["stability", "--n", "2", "--sigma", "0.5", "--omega-p", str(math.sqrt(1.04))], capsys)
    assert code == EXIT_OK
    assert "# machine:" in err
    assert _body(out)[0] == "re_root,im_root"
    assert all(float(r.split(",")[0]) < 0 for r in _body(out)[1:])
    code, _, _ = _run(["stability", "--n", "2", "--sigma", "3"], capsys)
    assert code == EXIT_UNSTABLE


def test_unstable_energy_request(capsys):
    assert _run(["energy", "--n", "2", "--sigma", "3"], capsys)[0] == EXIT_UNSTABLE


def test_balance_command(capsys):
    code, out, _ = _run(["balance", "--n", "2", "--sigma", "0.5", "--beta", "1"], capsys)
    assert code == EXIT_OK
    rows = [dict(zip(_body(out)[0].split(","), r.split(","))) for r in _body(out)[1:]]
    assert len(rows) == 2
    for r in rows:
        assert float(r["p_gamma"]) < 0 < float(r["p_xi"])
        assert abs(float(r["residual"])) < 1e-6 * abs(float(r["p_xi"]))


def test_sweep_order_is_independent_of_workers(monkeypatch, capsys):
    argv = ["sweep", "--parameter", "gamma", "--values", "0.3", "0.1", "0.2", "--beta", "1"]
    one = _run(argv + ["--threads", "1"], capsys)[1]
    monkeypatch.setenv("OQS_THREADS", "2")
    two = _run(argv, capsys)[1]
    assert one == two
    assert [r.split(",")[0] for r in _body(one)[1:]] == ["0.29999999999999999", "0.10000000000000001", "0.20000000000000001"]


def test_simulate_small_run(capsys):
    argv = ["simulate", "--realizations", "20", "--duration", "30", "--seed", "3", "--beta", "1"]
    code, out, err = _run(argv, capsys)
    assert code == EXIT_OK
    assert _header(out)["seed"] == "3"
    assert "status: NON-RELAXED" in err
    cols = _body(out)[0].split(",")
    assert cols[:3] == ["t", "sxx_00", "svv_00"]
    assert _run(argv, capsys)[1] == out


def test_spectrum_command(capsys):
    code, out, _ = _run(["spectrum"], capsys)
    assert code == EXIT_OK
    assert _body(out)[0] == "omega,ell,temperature,hadamard"
    assert len(_body(out)) == 1 + 201 * 9


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "oqs_thermo", "closed-form", "--beta", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# oqs-thermo")
