import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from complexity_lab import cli, experiments
from complexity_lab.dynamics import write_weights
from complexity_lab.errors import ConvergenceError, InvalidArgumentError
from complexity_lab.experiments import (
    ExperimentConfig,
    measure_cells,
    parse_beta_grid,
    read_table,
    summarize,
)

DATA = Path(__file__).parent / "data"


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "complexity_lab", *args],
        capture_output=True,
        text=True,
        env=env,
    )


class TestBetaGrid:
    def test_default(self):
        grid = experiments.default_beta_grid()
        assert len(grid) == 41 and grid[0] == 0.0 and grid[-1] == 4.0
        assert grid[3] == 0.3

    def test_list(self):
        assert parse_beta_grid("0.5,1,2") == (0.5, 1.0, 2.0)

    @pytest.mark.parametrize("text", ["a,b", "0:1", "0:1:0", "1:0:0.1"])
    def test_bad(self, text):
        with pytest.raises(InvalidArgumentError):
            parse_beta_grid(text)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"beta_grid": (1.0, 0.5)},
            {"beta_grid": (-0.1, 1.0)},
            {"beta_grid": (0.0, float("inf"))},
            {"trials": 0},
            {"weight_low": 1.0, "weight_high": 0.0},
            {"n_nodes": 13},
            {"seed": -1},
            {"tol_projection": 0.0},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(InvalidArgumentError):
            ExperimentConfig("sweep-beta", **kw)

    def test_capacity_may_exceed_dense_limit(self):
        ExperimentConfig("hopfield-capacity", n_nodes=14)


class TestMeasure:
    def test_zero_weights(self):
        cells = measure_cells(np.zeros((3, 3)), 2.0)
        assert all(abs(c) < 1e-12 for c in cells)

    def test_golden_row(self, tmp_path):
        out = tmp_path / "m.csv"
        res = run_cli("measure", "--weights", str(DATA / "weights_n2.csv"), "--beta", "1.5", "--out", str(out))
        assert res.returncode == 0, res.stderr
        got = read_table(out).rows[0]
        golden = read_table(DATA / "measure_n2_golden.csv").rows[0]
        assert got == pytest.approx(golden, abs=1e-10)

    def test_file_round_trip_bit_identical(self, tmp_path):
        W = np.random.default_rng(8).uniform(-1, 1, (4, 4))
        write_weights(tmp_path / "w.csv", W)
        cfg = ExperimentConfig("measure", n_nodes=4, beta_grid=(1.3,))
        from complexity_lab.dynamics import read_weights

        assert experiments.measure(cfg, read_weights(tmp_path / "w.csv")) == experiments.measure(cfg, W)

    def test_parse_error_exit(self, tmp_path):
        f = tmp_path / "w.csv"
        f.write_text("1,2\n3,x\n")
        res = run_cli("measure", "--weights", str(f))
        assert res.returncode == 1
        assert "w.csv:2:" in res.stderr


class TestSweep:
    def test_rows_and_bounds(self, tmp_path):
        out = tmp_path / "s.csv"
        res = run_cli("sweep-beta", "--nodes", "3", "--trials", "3", "--beta-grid", "0:1:0.5", "--seed", "4", "--out", str(out))
        assert res.returncode == 0, res.stderr
        table = read_table(out)
        assert table.columns == ("trial", "beta", "MI", "SI", "IF", "PhiG", "I")
        assert [(r[0], r[1]) for r in table.rows] == [(t, b) for t in range(3) for b in (0.0, 0.5, 1.0)]
        for row in table.rows:
            mi, si, if_, phi, i_ = row[2:]
            if row[1] == 0.0:
                assert all(abs(v) < 1e-9 for v in row[2:])
            assert phi <= i_ + 1e-6 and phi <= if_ + 1e-6
        assert table.header["rng"].startswith("numpy.random.PCG64")
        assert table.header["seed"] == "4"

    def test_error_markers_give_exit_2(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise ConvergenceError("forced", 1.0, 1)

        monkeypatch.setattr(experiments, "phi_g", boom)
        out = tmp_path / "s.csv"
        code = cli.main(["sweep-beta", "--nodes", "2", "--trials", "1", "--beta-grid", "1", "--out", str(out)])
        assert code == 2
        row = read_table(out).rows[0]
        assert row[5] == "error:ConvergenceError"
        assert isinstance(row[4], float)

    def test_worker_counts_byte_identical(self, tmp_path):
        args = ["sweep-beta", "--nodes", "3", "--trials", "4", "--beta-grid", "0.5,1", "--seed", "9"]
        assert cli.main(args + ["--workers", "1", "--out", str(tmp_path / "a.csv")]) == 0
        assert cli.main(args + ["--workers", "3", "--out", str(tmp_path / "b.csv")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_summary(self, tmp_path):
        out = tmp_path / "s.csv"
        code = cli.main(["sweep-beta", "--nodes", "2", "--trials", "5", "--beta-grid", "0.5,1", "--out", str(out), "--summary"])
        assert code == 0
        rows = read_table(out).rows
        summ = read_table(tmp_path / "s.summary.csv")
        assert summ.columns[:4] == ("beta", "MI_n", "MI_mean", "MI_stderr")
        mi = np.array([r[2] for r in rows if r[1] == 1.0])
        got = summ.rows[1]
        assert got[0] == 1.0 and got[1] == 5
        assert got[2] == pytest.approx(mi.mean(), abs=1e-15)
        assert got[3] == pytest.approx(mi.std(ddof=1) / np.sqrt(5), abs=1e-15)

    def test_summary_needs_out(self):
        assert cli.main(["sweep-beta", "--trials", "1", "--beta-grid", "1", "--summary"]) == 1


def test_summarize_skips_error_cells():
    cols, rows = summarize(("trial", "T", "IF_bits"), [[0, 1, 1.0], [1, 1, "error:X"], [2, 1, 3.0]])
    assert rows == [[1, 2, 2.0, pytest.approx(1.0)]]


class TestHopfieldCommands:
    def test_learn(self, tmp_path):
        out = tmp_path / "l.csv"
        code = cli.main(["hopfield-learn", "--nodes", "4", "--trials", "2", "--patterns-max", "3", "--out", str(out), "--summary"])
        assert code == 0
        table = read_table(out)
        assert table.columns == ("trial", "T", "IF_bits")
        assert len(table.rows) == 6
        assert (tmp_path / "l.summary.csv").exists()

    def test_capacity(self, tmp_path):
        out = tmp_path / "c.csv"
        code = cli.main(["hopfield-capacity", "--nodes", "5", "--trials", "2", "--patterns-max", "4", "--zero-diagonal", "--out", str(out)])
        assert code == 0
        table = read_table(out)
        assert table.columns == ("trial", "T", "capacity_bits")
        assert max(r[2] for r in table.rows) <= 5 + 1e-9
        assert table.header["zero_diagonal"] == "true"

    def test_dense_guard(self):
        res = run_cli("hopfield-learn", "--nodes", "13", "--trials", "1")
        assert res.returncode == 1
        assert "exceeds 12" in res.stderr

    def test_thread_cap_env(self, tmp_path):
        import os

        env = dict(os.environ, COMPLEXITY_LAB_THREADS="1")
        a = run_cli("hopfield-learn", "--nodes", "3", "--trials", "3", "--patterns-max", "2", "--workers", "2", env=env)
        b = run_cli("hopfield-learn", "--nodes", "3", "--trials", "3", "--patterns-max", "2", "--workers", "1")
        assert a.returncode == b.returncode == 0
        assert a.stdout == b.stdout


class TestValidate:
    def test_ok_and_violation(self, tmp_path):
        out = tmp_path / "s.csv"
        assert cli.main(["sweep-beta", "--nodes", "2", "--trials", "2", "--beta-grid", "1,2", "--out", str(out)]) == 0
        assert cli.main(["validate", str(out)]) == 0
        lines = out.read_text().splitlines()
        cells = lines[-1].split(",")
        cells[5] = repr(float(cells[6]) + 0.1)  # PhiG above I
        lines[-1] = ",".join(cells)
        out.write_text("\n".join(lines) + "\n")
        assert cli.main(["validate", str(out)]) == 2

    def test_capacity_bound(self, tmp_path):
        f = tmp_path / "c.csv"
        f.write_text("# command=hopfield-capacity\n# nodes=2\ntrial,T,capacity_bits\n0,1,2.5\n")
        assert cli.main(["validate", str(f)]) == 2

    def test_unparseable(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("nothing useful\n")
        assert cli.main(["validate", str(f)]) == 1


def test_bad_flag_is_config_error():
    res = run_cli("sweep-beta", "--weights-range", "1")
    assert res.returncode == 1
