import csv
import io
import json
import os
import subprocess
import sys

import pytest

from qps import __version__
from qps.cli import main


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.reader(io.StringIO("".join(l + "\n" for l in text.splitlines() if not l.startswith("#")))))


def test_lyapunov_six_rows(capsys):
    code, out, _ = _run(["lyapunov", "--omega", "golden", "--potential", "amo:lambda=3",
                         "--energy", "0", "--m", "1000", "--ntheta", "2048",
                         "--eps", "0:0.05:0.01"], capsys)
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["eps", "L_m"]
    assert len(rows) == 7
    assert abs(float(rows[1][1]) - 1.0986) < 0.05
    header = out.splitlines()
    assert header[0] == f"# qps {__version__}"
    assert json.loads(header[1][len("# config: "):])["m"] == 1000


def test_byte_identical_outputs(tmp_path):
    args = ["ids", "--N", "128", "--energies=-3:3:0.5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    # the output path is part of the echoed config; the rest must match byte for byte
    ta, tb = a.read_bytes(), b.read_bytes()
    assert ta.replace(b"a.csv", b"") == tb.replace(b"b.csv", b"")
    assert main(args + ["--output", str(a)]) == 0
    assert a.read_bytes() == ta
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".qps-")]


def test_threads_do_not_change_results(capsys, monkeypatch):
    args = ["lyapunov", "--m", "300", "--ntheta", "512", "--eps", "0,0.03"]
    _, one, _ = _run(args + ["--threads", "1"], capsys)
    monkeypatch.setenv("QPS_THREADS", "3")
    _, three, _ = _run(args, capsys)
    assert _rows(one) == _rows(three)
    assert '"threads": 3' in three


def test_json_commands(capsys):
    code, out, _ = _run(["acceleration", "--m", "400", "--ntheta", "512"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["qps_version"] == __version__
    assert doc["result"]["nearest_integer"] == 1
    code, out, _ = _run(["riesz", "--eps", "0.01,0.05", "--m", "300", "--ntheta", "256"], capsys)
    assert code == 0 and abs(json.loads(out)["result"]["mass"]) < 0.05
    code, out, _ = _run(["holder", "--N", "4096", "--potential", "zero"], capsys)
    assert code == 0 and abs(json.loads(out)["result"]["exponent"] - 1) < 0.15


def test_green_check(capsys):
    code, out, _ = _run(["green-check", "--N", "128", "--eta", "1e-2,5e-3"], capsys)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["max_annulus_discrepancy"] < 1e-8
    assert res["resolvent_decoupling"]["max_discrepancy"] < 1e-8
    assert all(t["holds"] for t in res["green_trace"])


def test_ldt_command(capsys):
    code, out, _ = _run(["ldt", "--m", "200", "--ntheta", "512", "--delta", "0.3"], capsys)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["completeness_residual"] < 1e-8
    assert len(res["band_sup_norms"]) == 7
    assert len(res["deviation"]) == 3


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m = 50\nntheta = 128\neps = 0,0.01,0.02\n")
    code, out, _ = _run(["lyapunov", "--config", str(cfg), "--eps", "0.05"], capsys)
    assert code == 0
    assert len(_rows(out)) == 2


def test_exit_code_config(capsys, tmp_path):
    code, _, err = _run(["lyapunov", "--omega", "1.5"], capsys)
    assert code == 2 and "omega" in err
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("m = 10\nntheta = 100\n")
    code, _, err = _run(["lyapunov", "--config", str(cfg)], capsys)
    assert code == 2 and "n_theta" in err
    cfg.write_text("m = ten\n")
    code, _, err = _run(["lyapunov", "--config", str(cfg)], capsys)
    assert code == 2 and "line 1" in err
    code, _, err = _run(["riesz", "--eps", "0.1"], capsys)
    assert code == 2 and "eps" in err


def test_exit_code_numeric_guard(capsys):
    code, _, err = _run(["lyapunov", "--omega", "liouville:beta=3,levels=9"], capsys)
    assert code == 3 and "BudgetExceeded" in err


def test_acceptance_subset(capsys):
    code, out, err = _run(["acceptance", "--suite", "primary", "--criteria", "1,15"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["result"]["passed"]
    assert "[PASS]  1." in err and "[PASS] 15." in err


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "qps.cli", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == f"qps {__version__}"
