"""End-to-end command-line coverage: artifacts on disk, determinism,
exit codes, and config-file precedence."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ctqwlab.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def test_generate_writes_edge_list(tmp_path, capsys):
    assert run("generate", "--family", "dsg", "--g", "3",
               "--out", tmp_path) == 0
    path = tmp_path / "edges_dsg_g3.txt"
    text = path.read_text()
    lines = text.strip().splitlines()
    assert lines[0] == "# N=27"
    assert len(lines) == 1 + (3**4 - 3) // 2
    out = capsys.readouterr().out
    assert "edges_dsg_g3.txt" in out


def test_generate_inline_product_spec(tmp_path):
    spec = json.dumps({
        "family": "product",
        "factors": [{"family": "dsg", "g": 2},
                    {"family": "chain", "L": 4, "periodic": False}],
    })
    assert run("generate", "--spec", spec, "--out", tmp_path) == 0
    files = list(tmp_path.glob("edges_*.txt"))
    assert len(files) == 1
    header = files[0].read_text().splitlines()[0]
    assert header == "# N=36"


def test_spectrum_artifact_and_rerun_identical(tmp_path):
    assert run("spectrum", "--family", "torus", "--L", "4", "--d", "2",
               "--out", tmp_path) == 0
    path = tmp_path / "spectrum_torus_d2_L4.csv"
    first = path.read_bytes()
    lines = first.decode().strip().splitlines()
    assert lines[0] == "index,eigenvalue,multiplicity_group"
    assert len(lines) == 17
    assert run("spectrum", "--family", "torus", "--L", "4", "--d", "2",
               "--out", tmp_path) == 0
    assert path.read_bytes() == first


def test_overlaps_csv_values_round_trip(tmp_path):
    assert run("overlaps", "--family", "complete", "--n", "32",
               "--gamma-min", "0.01", "--gamma-max", "0.08",
               "--gamma-count", "5", "--out", tmp_path) == 0
    path = tmp_path / "overlaps_complete_n32.csv"
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ("gamma,sPsi0Sq,sPsi1Sq,wPsi0Sq,wPsi1Sq,E0,E1,"
                        "degenerateE1")
    assert len(lines) == 6
    row = lines[1].split(",")
    assert len(row) == 8
    # 17 significant digits reproduce the double exactly
    val = float(row[1])
    assert float(f"{val:.17g}") == val
    assert row[7] in {"0", "1"}


def test_critgamma_table(tmp_path, capsys):
    assert run("critgamma", "--family", "complete", "--sizes", "16,32",
               "--out", tmp_path) == 0
    path = tmp_path / "critgamma_complete.csv"
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "label,N,gamma_crit,xi1,residual,evaluations"
    assert len(lines) == 3
    for line, n in zip(lines[1:], (16, 32)):
        cells = line.split(",")
        assert cells[0] == f"complete_n{n}"
        assert int(cells[1]) == n
        # the balanced-overlap coupling is exactly (N-2)/N^2 here
        assert float(cells[2]) == pytest.approx((n - 2) / n**2, rel=1e-6)
        assert float(cells[4]) <= 1e-6
    out = capsys.readouterr().out
    assert "complete_n16" in out


def test_success_grid_artifacts(tmp_path, capsys):
    assert run("success", "--family", "complete", "--n", "16",
               "--gamma-min", "0.04", "--gamma-max", "0.09",
               "--gamma-count", "3", "--tmax", "30", "--t-count", "13",
               "--out", tmp_path) == 0
    mat = (tmp_path / "success_complete_n16_matrix.csv").read_text()
    rows = mat.strip().splitlines()
    assert rows[0].split(",")[0] == "gamma_by_t"
    assert len(rows) == 4
    long_rows = (tmp_path / "success_complete_n16_long.csv"
                 ).read_text().strip().splitlines()
    assert long_rows[0] == "gamma,t,pi"
    assert len(long_rows) == 1 + 3 * 13
    assert "peak" in capsys.readouterr().out


def test_success_single_gamma_reports_period(tmp_path, capsys):
    n = 64
    assert run("success", "--family", "complete", "--n", n,
               "--gamma", 1.0 / n, "--tmax", 4 * math.pi * math.sqrt(n),
               "--t-count", "257", "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "oscillation period" in out
    stated = float(out.split("oscillation period ~")[1].split()[0])
    assert stated == pytest.approx(math.pi * math.sqrt(n), rel=0.02)


def test_threads_do_not_change_bytes(tmp_path):
    base = ["success", "--family", "complete", "--n", "12",
            "--gamma-min", "0.05", "--gamma-max", "0.12",
            "--gamma-count", "4", "--tmax", "20", "--t-count", "9"]
    assert run(*base, "--threads", "1", "--out", tmp_path / "a") == 0
    assert run(*base, "--threads", "2", "--out", tmp_path / "b") == 0
    for name in ("success_complete_n12_matrix.csv",
                 "success_complete_n12_long.csv"):
        assert ((tmp_path / "a" / name).read_bytes()
                == (tmp_path / "b" / name).read_bytes())


def test_fit_powerlaw_artifact(tmp_path, capsys):
    assert run("fit", "--family", "complete", "--sizes", "8,16,32,64",
               "--model", "power", "--alpha", "-1", "--out", tmp_path) == 0
    data = json.loads((tmp_path / "fit_complete_power.json").read_text())
    assert data["model"] == "power"
    # small sizes bend the (N-2)/N^2 law away from a pure power;
    # the exponent still has to land in the right neighbourhood
    assert -1.05 < data["params"]["beta"] < -0.8
    assert data["residual"] < 0.05
    assert len(data["points"]) == 4
    assert "beta" in capsys.readouterr().out


def test_fit_log_model_for_trees(tmp_path):
    assert run("fit", "--family", "cayleytree", "--g", "3..6",
               "--out", tmp_path) == 0
    data = json.loads((tmp_path / "fit_cayleytree_log.json").read_text())
    assert data["model"] == "log"
    assert set(data["params"]) == {"a", "b"}
    assert data["params"]["a"] == pytest.approx(1.0, abs=0.15)


def test_verify_report(tmp_path, capsys):
    assert run("verify", "--family", "dsg", "--g", "3",
               "--out", tmp_path) == 0
    data = json.loads((tmp_path / "bounds_dsg_g3.json").read_text())
    assert data["n"] == 27
    assert data["checks"]
    out = capsys.readouterr().out
    assert "s_psi0_sq_below_one" in out


@pytest.mark.parametrize("check", [
    "complete-vs-engine", "dsg-spectrum", "dsg-zeta", "decimation",
])
def test_oracle_checks_pass(check, capsys):
    assert run("oracle", "--check", check) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["max_error"] <= report["tolerance"]


def test_oracle_krylov_check(capsys):
    assert run("oracle", "--check", "krylov-vs-spectral") == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_exit_code_2_on_bad_usage(tmp_path, capsys):
    cases = [
        ("generate", "--family", "moebius", "--n", "8"),
        ("generate",),
        ("spectrum", "--family", "dsg", "--g", "0"),
        ("overlaps", "--family", "complete", "--n", "8",
         "--target", "99", "--gamma", "0.1"),
        ("generate", "--spec", "{}", "--spec-file", "x.json"),
    ]
    for argv in cases:
        code = run(*argv, "--out", tmp_path)
        err = capsys.readouterr().err
        assert code == 2, argv
        assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 2


def test_exit_code_3_when_no_crossing(tmp_path, capsys):
    code = run("critgamma", "--family", "dsg", "--g", "3",
               "--gamma-floor", "100", "--gamma-ceiling", "1000",
               "--out", tmp_path)
    assert code == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "NoTransitionError"


def test_exit_code_4_dense_guard_flag(tmp_path, capsys):
    code = run("spectrum", "--family", "complete", "--n", "64",
               "--dense-guard", "10", "--out", tmp_path)
    assert code == 4
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "DenseGuardError"


def test_dense_guard_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CTQW_DENSE_GUARD", "10")
    code = run("spectrum", "--family", "complete", "--n", "64",
               "--out", tmp_path)
    assert code == 4
    capsys.readouterr()
    # explicit flag outranks the environment
    monkeypatch.setenv("CTQW_DENSE_GUARD", "10")
    assert run("spectrum", "--family", "complete", "--n", "64",
               "--dense-guard", "100", "--out", tmp_path) == 0


def test_config_file_defaults_and_override(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"family": "dsg", "g": "3",
                                "out": str(tmp_path)}))
    assert run("generate", "--config", conf) == 0
    assert (tmp_path / "edges_dsg_g3.txt").exists()
    capsys.readouterr()
    # flags win over config values
    assert run("generate", "--config", conf, "--g", "2") == 0
    assert (tmp_path / "edges_dsg_g2.txt").exists()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"family": "dsg", "g": "3",
                                "grammar": "klingon"}))
    assert run("generate", "--config", conf, "--out", tmp_path) == 2
    msg = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "grammar" in msg["message"]


def test_module_entry_point_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ctqwlab.cli", "generate",
         "--family", "complete", "--n", "6", "--out", str(tmp_path)],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert (tmp_path / "edges_complete_n6.txt").exists()
