import json
import subprocess
import sys

import numpy as np
import pytest

from sigrep.cli import main


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def run_cli(*argv):
    return main(list(argv))


class TestCheckCommand:
    def test_passes_and_reports(self, tmp_path, capsys):
        code = run_cli(
            "check", "--level", "4", "--seed", "7", "--paths", "300", "--out", str(tmp_path)
        )
        assert code == 0
        report = json.loads(read(tmp_path / "check_report.json"))
        assert report["passed"] is True
        names = {e["name"] for e in report["invariants"]}
        assert {"shuffle_pathwise", "fawcett_expected_signature", "resolvent_two_sided_inverse"} <= names
        shuffle = next(e for e in report["invariants"] if e["name"] == "shuffle_pathwise")
        assert shuffle["max_abs_residual"] < 1e-10
        for entry in report["invariants"]:
            assert {"name", "measured", "threshold", "passed"} <= set(entry)

    def test_level_zero_is_an_argument_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("check", "--level", "0")
        assert exc.value.code == 2


class TestSimulateCommand:
    def test_rl_csv_schema(self, tmp_path):
        code = run_cli(
            "simulate", "--model", "rl", "--hurst", "0.3", "--steps", "50",
            "--truncation", "2,4,8,16", "--seed", "3", "--paths", "1",
            "--eps", str(1 / 52), "--out", str(tmp_path),
        )
        assert code == 0
        lines = read(tmp_path / "trajectories.csv").decode().splitlines()
        assert lines[0] == "t,path_id,series,value"
        body = [line.split(",") for line in lines[1:]]
        series = {row[2] for row in body}
        assert series == {"ref", "sig_M2", "sig_M4", "sig_M8", "sig_M16"}
        assert len(body) == 5 * 51

    def test_two_paths_and_determinism(self, tmp_path):
        args = (
            "simulate", "--model", "delay", "--steps", "40", "--truncation", "2,4",
            "--seed", "9", "--paths", "2",
        )
        run_cli(*args, "--out", str(tmp_path / "one"))
        run_cli(*args, "--out", str(tmp_path / "two"))
        first = read(tmp_path / "one" / "trajectories.csv")
        assert first == read(tmp_path / "two" / "trajectories.csv")
        ids = {line.split(",")[1] for line in first.decode().splitlines()[1:]}
        assert ids == {"0", "1"}

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        args = (
            "simulate", "--model", "rl", "--steps", "30", "--truncation", "2,4",
            "--seed", "5", "--paths", "2",
        )
        run_cli(*args, "--threads", "1", "--out", str(tmp_path / "t1"))
        run_cli(*args, "--threads", "2", "--out", str(tmp_path / "t2"))
        assert read(tmp_path / "t1" / "trajectories.csv") == read(tmp_path / "t2" / "trajectories.csv")


class TestTableCommand:
    def test_rl_table_csv(self, tmp_path):
        config = tmp_path / "cfg.toml"
        config.write_text(
            "[run]\npaths = 60\npaths_deep = 20\nsteps = 40\ntruncations = [2, 4]\n"
            "[rl]\nH_list = [0.3, 0.7]\n"
        )
        code = run_cli("table", "rl-mse", "--config", str(config), "--out", str(tmp_path))
        assert code == 0
        lines = read(tmp_path / "table_rl_mse.csv").decode().splitlines()
        assert lines[0] == "M,H=0.3,H=0.7"
        assert [line.split(",")[0] for line in lines[1:]] == ["2", "4"]
        cells = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
        assert np.all(cells > 0)
        assert np.all(cells[0] > cells[1])

    def test_delay_table_csv(self, tmp_path):
        code = run_cli(
            "table", "delay-mse", "--steps", "40", "--paths", "50",
            "--truncation", "2", "--out", str(tmp_path),
        )
        assert code == 0
        lines = read(tmp_path / "table_delay_mse.csv").decode().splitlines()
        assert lines[0] == "M,a,b"
        assert len(lines) == 2


class TestApproxKernelCommand:
    def test_l2_column_decreases(self, tmp_path):
        code = run_cli(
            "approx-kernel", "--hurst", "0.1", "--atoms", "10,20,40", "--out", str(tmp_path)
        )
        assert code == 0
        lines = read(tmp_path / "kernel_approx.csv").decode().splitlines()
        assert lines[0] == "n,l2_error"
        errors = [float(line.split(",")[1]) for line in lines[1:]]
        assert errors == sorted(errors, reverse=True)


class TestConsoleEntryPoint:
    def test_subprocess_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "sigrep.cli", "simulate", "--model", "ou",
             "--steps", "20", "--truncation", "2", "--seed", "1", "--out", str(tmp_path)],
            capture_output=True, text=True, timeout=300,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "trajectories.csv").exists()


class TestSpecInvocation:
    def test_check_level6_seed7_paths2000(self):
        assert run_cli("check", "--level", "6", "--seed", "7", "--paths", "2000") == 0
