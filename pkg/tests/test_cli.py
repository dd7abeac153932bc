import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from redsim.cli import main, run_bench


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_fading_sis_run_conserves_agents(tmp_path):
    assert run_cli("run", "--model", "sis-fading", "--nodes", 500, "--beta", 2.5, "--horizon", 2,
                   "--reps", 2, "--grid", 21, "--seed", 3, "--out", tmp_path) == 0
    header, data = read_csv(tmp_path / "traj_0000.csv")
    assert header == ["time", "S", "I"]
    assert data.shape == (21, 3)
    assert np.all(data[:, 1] + data[:, 2] == 500)
    assert data[0, 2] == 25  # 5% initially infected
    assert (tmp_path / "traj_0001.csv").exists()
    _, mean = read_csv(tmp_path / "mean.csv")
    _, second = read_csv(tmp_path / "traj_0001.csv")
    assert np.allclose(mean[:, 1:], (data[:, 1:] + second[:, 1:]) / 2, atol=1e-6)


def test_voter_run_starts_balanced(tmp_path):
    assert run_cli("run", "--model", "voter", "--nodes", 501, "--beta", 2.5, "--horizon", 1,
                   "--grid", 5, "--out", tmp_path) == 0
    header, data = read_csv(tmp_path / "traj_0000.csv")
    assert header == ["time", "A", "B"]
    assert abs(data[0, 1] - data[0, 2]) <= 1


def test_reruns_are_byte_identical(tmp_path):
    args = ["run", "--model", "sis", "--param", "c_i=0.7", "--nodes", 300, "--beta", 2.0,
            "--horizon", 3, "--reps", 3, "--seed", 9]
    assert run_cli(*args, "--out", tmp_path / "a") == 0
    assert run_cli(*args, "--out", tmp_path / "b", "--jobs", 2) == 0
    for name in ("traj_0000.csv", "traj_0002.csv", "mean.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_edge_list_source(tmp_path):
    edges = tmp_path / "g.txt"
    edges.write_text("0 1\n1 2\n2 3\n3 0\n")
    assert run_cli("run", "--model", "sis", "--edge-list", edges, "--horizon", 1, "--grid", 3,
                   "--init-fraction", 0.5, "--out", tmp_path / "o") == 0
    _, data = read_csv(tmp_path / "o" / "traj_0000.csv")
    assert np.all(data[:, 1:].sum(axis=1) == 4)
    assert data[0, 2] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--model", "sis", "--nodes", "100", "--horizon", "1", "--out", "x"],
        ["run", "--model", "sis", "--horizon", "1", "--out", "x"],
        ["run", "--model", "sis", "--nodes", "100", "--beta", "2", "--horizon", "1", "--reps", "0", "--out", "x"],
        ["run", "--model", "nope", "--nodes", "100", "--beta", "2", "--horizon", "1", "--out", "x"],
        ["run", "--model", "sis", "--nodes", "100", "--beta", "2", "--horizon", "1", "--param", "c_i", "--out", "x"],
        ["bench", "--model", "sis", "--sizes", "100,10", "--out", "x"],
    ],
)
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_bound_violation_exits_1(tmp_path, capsys):
    code = run_cli("run", "--model", "sis", "--param", "bound_scale=0.5", "--nodes", 100, "--beta", 2.5,
                   "--init-fraction", 0.5, "--horizon", 50, "--out", tmp_path)
    assert code == 1
    assert "bound violation" in capsys.readouterr().err


def test_bad_edge_list_exits_1(tmp_path, capsys):
    edges = tmp_path / "g.txt"
    edges.write_text("0 1\n1 1\n")
    assert run_cli("run", "--model", "sis", "--edge-list", edges, "--horizon", 1, "--out", tmp_path / "o") == 1
    assert "line 2" in capsys.readouterr().err


def test_bench_json_and_svg(tmp_path):
    assert run_cli("bench", "--model", "sis-fading", "--sizes", "200", "--target-steps", 2000,
                   "--out", tmp_path) == 0
    data = json.loads((tmp_path / "bench.json").read_text())
    assert [r["engine"] for r in data] == ["redsim", "baseline"]
    for rec in data:
        assert rec["total_steps"] == rec["successful_steps"] + rec["rejected_steps"]
        assert rec["successful_steps"] >= 2000
        assert rec["ns_per_successful_step"] > 0
        assert rec["node_count"] == 200 and rec["model"] == "sis-fading"
    assert data[1]["rejected_steps"] == 0
    svg = (tmp_path / "bench.svg").read_bytes()
    assert svg.startswith(b"<?xml")
    assert run_cli("plot", tmp_path / "bench.json", "--out", tmp_path / "again.svg") == 0
    assert (tmp_path / "again.svg").read_bytes() == svg


def test_run_bench_single_engine():
    records = run_bench(["redsim"], "voter", [200], 2.5, 1, target_steps=500, max_horizon=2.0)
    assert len(records) == 1
    assert records[0].engine == "redsim"
    assert 0 < records[0].horizon <= 2.0


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "redsim.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "bench" in proc.stdout
