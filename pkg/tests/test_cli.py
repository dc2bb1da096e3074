import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ricci_willmore.cli import RunConfig, emit_plot_data, main, sweep_points
from ricci_willmore.errors import ConfigurationError


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload, indent=1))
    return path


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ricci-willmore")
    return list(csv.DictReader(lines[1:]))


def test_thm11_equality_run(tmp_path):
    cfg = write(tmp_path, "c.json", {"command": "thm11", "warp": "hyperbolic", "profile": "zero",
                                     "n": 2, "r0": 1})
    assert main(["thm11", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    (row,) = read_rows(tmp_path / "thm11.csv")
    assert row["pass"] == "true"
    assert abs(float(row["margin"])) <= 1e-6 * float(row["rhs"])
    assert list(row) == ["theorem", "n", "p", "r0", "profile", "lhs", "rhs", "margin", "rv",
                         "rv_spread", "b", "rho_norm", "C_total", "pass"]


def test_lemma31_rejects_boundary_q(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"command": "lemma31", "p": 2, "q": 1.0})
    assert main(["lemma31", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "q must exceed" in capsys.readouterr().err


def test_lemma31_flags(tmp_path):
    code = main(["lemma31", "--p", "3", "--q", "2.5", "--eps-grid", "1,0.1,0.01,1e-4,1e-6",
                 "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "lemma31.csv")
    assert all(r["pass"] == "true" for r in rows)
    assert rows[-1]["check"] == "vanishing_ratio"


def test_sweep_nine_rows_in_order(tmp_path):
    cfg = write(tmp_path, "c.json", {"command": "sweep", "grid": {"r0": [0.5, 1, 2], "n": [1, 2, 3]}})
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sweep.csv")
    assert len(rows) == 9
    assert [(r["r0"], r["n"]) for r in rows[:3]] == [("0.5", "1"), ("0.5", "2"), ("0.5", "3")]


def test_sweep_is_deterministic_across_thread_counts(tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.json", {"command": "sweep", "sweep_command": "thm12",
                                     "grid": {"r0": [0.5, 1.0], "n": [2, 3], "p": [2.5]}})
    outputs = []
    for threads in ("1", "4", "4"):
        monkeypatch.setenv("TOOL_THREADS", threads)
        out = tmp_path / f"o{len(outputs)}"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        outputs.append((out / "sweep.csv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_violation_beyond_tolerance_exits_2(tmp_path):
    # the equality case carries a roundoff-sized negative margin here
    cfg = write(tmp_path, "c.json", {"command": "thm11", "n": 3, "r0": 0.5})
    assert main(["thm11", "--config", str(cfg), "--out", str(tmp_path), "--tol", "1e-300"]) == 2
    (row,) = read_rows(tmp_path / "thm11.csv")
    assert row["pass"] == "false" and float(row["margin"]) < 0


def test_malformed_json_reports_line(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", '{"command": "thm11",\n "n": 2\n "r0": 1}\n')
    assert main(["thm11", "--config", str(cfg)]) == 1
    assert "c.json:3:" in capsys.readouterr().err


def test_unknown_key_reports_line(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", '{\n "command": "thm11",\n "radius": 2\n}\n')
    assert main(["thm11", "--config", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "c.json:3:" in err and "radius" in err


@pytest.mark.parametrize("payload", [
    {"command": "thm11", "step": 0.1},
    {"command": "thm11", "r0": -1},
    {"command": "thm11", "n": 1.5},
    {"command": "thm12", "p": 1.2},
    {"command": "thm11", "warp": {"psi1": {"family": "power", "a": 1, "s": 0.5}}},
    {"command": "sweep"},
    {"command": "riccati-blowup", "H_over_n": [-1.0]},
])
def test_bad_configs_exit_1(tmp_path, payload):
    cfg = write(tmp_path, "c.json", payload)
    assert main([payload["command"], "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_command_mismatch_and_missing_config(tmp_path):
    cfg = write(tmp_path, "c.json", {"command": "thm12"})
    assert main(["thm11", "--config", str(cfg)]) == 1
    assert main(["thm11"]) == 1


def test_lemma_suites_and_plot_data(tmp_path):
    profiles = [{"family": "exponential", "a": 1, "c": 1}, {"family": "power", "a": 1, "s": 2}]
    for cmd in ("lemma21", "lemma22"):
        cfg = write(tmp_path, f"{cmd}.json", {"command": cmd, "profile": profiles, "plot": True})
        assert main([cmd, "--config", str(cfg), "--out", str(tmp_path)]) == 0
    data = tmp_path / "plot_data"
    up = np.loadtxt(data / "psi1_over_sinh_exp_a_1_c_1.dat")
    down = np.loadtxt(data / "psi2_over_psi1_exp_a_1_c_1.dat")
    assert np.all(np.diff(up[:, 1]) >= -1e-12 * up[1:, 1])
    assert np.all(np.diff(down[:, 1]) <= 1e-12 * down[1:, 1])
    header = (data / "psi1_over_sinh_exp_a_1_c_1.dat").read_text().splitlines()[0]
    assert header == "# t psi1/sinh"


def test_riccati_blowup_command(tmp_path):
    cfg = write(tmp_path, "c.json", {"command": "riccati-blowup", "n": 2,
                                     "profile": {"family": "exponential", "a": 1, "c": 1},
                                     "d0": 1.0, "H_over_n": [-3.5, -5], "t_max": 5})
    assert main(["riccati-blowup", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "riccati-blowup.csv")
    assert len(rows) == 6 and all(r["pass"] == "true" for r in rows)


def test_emit_plot_data(tmp_path):
    (path,) = emit_plot_data({"demo": ("t", "y", [0.0, 1.0], [1 / 3, 2 / 3])}, tmp_path)
    lines = path.read_text().splitlines()
    assert lines == ["# t y", "0 0.33333333333333331", "1 0.66666666666666663"]
    with pytest.raises(ValueError):
        emit_plot_data({}, tmp_path)
    with pytest.raises(ValueError):
        emit_plot_data({"e": ("t", "y", [], [])}, tmp_path)
    with pytest.raises(ValueError):
        emit_plot_data({"e": ("t", "y", [0.0, 1.0], [1.0])}, tmp_path)


def test_sweep_points_cover_grid():
    cfg = RunConfig(command="sweep", grid={"r0": [1.0, 2.0], "n": [1, 2, 3]})
    pts = sweep_points(cfg)
    assert len(pts) == 6 and all(p.command == "thm11" for p in pts)
    with pytest.raises(ConfigurationError):
        RunConfig(command="sweep", grid={"bogus": [1]})


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "c.json", {"command": "thm11", "n": 1, "r0": 1})
    proc = subprocess.run([sys.executable, "-m", "ricci_willmore", "thm11", "--config", str(cfg),
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
