"""Command-line interface: subcommands, exit codes, manifest round-trips."""

import os

import numpy as np
import pytest

from rbc_stoplab.cli import main, parse_config_file


GOOD_CONFIG = """\
# three-class demo
n = 3
prior = 0.42,0.55,0.03
true_index = 0
tau = 0.8
methods = M1,MP,M3
mu_pos = 0.6
c_pos = 0.5
mu_neg = 0.0
c_neg = 0.5
scheme = broadcast
trials = 200
max_sequences = 8
seed = 42
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestConfigParsing:
    def test_unknown_key_names_key_and_line(self, tmp_path):
        path = write_config(tmp_path, "n = 3\nbogus = 1\n")
        with pytest.raises(Exception) as err:
            parse_config_file(path)
        assert "bogus" in str(err.value)
        assert ":2:" in str(err.value)

    def test_comments_and_blank_lines(self, tmp_path):
        path = write_config(tmp_path, "# hi\n\nn = 3  # inline\n")
        assert parse_config_file(path) == {"n": "3"}

    def test_missing_file_exit_code(self, tmp_path, capsys):
        rc = main(["simulate", str(tmp_path / "nope.cfg")])
        assert rc == 2
        assert "not found" in capsys.readouterr().err

    def test_invalid_value_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, GOOD_CONFIG.replace("tau = 0.8", "tau = oops"))
        rc = main(["simulate", path])
        assert rc == 2
        assert "tau" in capsys.readouterr().err

    def test_bad_method_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path,
                            GOOD_CONFIG.replace("M1,MP,M3", "M1,M9"))
        rc = main(["simulate", path])
        assert rc == 2
        assert "methods" in capsys.readouterr().err


class TestSimulate:
    def test_writes_results_and_manifest(self, tmp_path, capsys):
        out_dir = tmp_path / "out"
        cfg = GOOD_CONFIG + f"out_dir = {out_dir}\n"
        rc = main(["simulate", write_config(tmp_path, cfg)])
        assert rc == 0
        for name in ("p_stop.csv", "p_true_given_stop.csv", "summary.csv",
                     "manifest.txt"):
            assert (out_dir / name).exists()

    def test_manifest_reruns_byte_identical(self, tmp_path):
        out_dir = tmp_path / "out"
        cfg = GOOD_CONFIG + f"out_dir = {out_dir}\n"
        assert main(["simulate", write_config(tmp_path, cfg)]) == 0
        first = {name: read_bytes(out_dir / name)
                 for name in ("p_stop.csv", "p_true_given_stop.csv", "summary.csv")}
        # rerun straight from the emitted manifest
        assert main(["simulate", str(out_dir / "manifest.txt")]) == 0
        for name, blob in first.items():
            assert read_bytes(out_dir / name) == blob


class TestTable:
    def test_writes_comparison_and_signals_failures(self, tmp_path, capsys):
        out_dir = str(tmp_path / "t2")
        rc = main(["table", "T2", "--trials", "300", "--out-dir", out_dir])
        assert rc in (0, 1)
        assert os.path.exists(os.path.join(out_dir, "comparison_T2.csv"))
        assert "cells within" in capsys.readouterr().out

    def test_byte_identical_reruns_across_worker_counts(self, tmp_path, monkeypatch):
        out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
        monkeypatch.delenv("RBC_STOPLAB_THREADS", raising=False)
        main(["table", "T2", "--trials", "300", "--out-dir", out_a])
        monkeypatch.setenv("RBC_STOPLAB_THREADS", "3")
        main(["table", "T2", "--trials", "300", "--out-dir", out_b])
        for name in ("comparison_T2.csv", "p_stop.csv", "p_true_given_stop.csv"):
            assert read_bytes(os.path.join(out_a, name)) == \
                read_bytes(os.path.join(out_b, name))


class TestBoundary:
    def test_gap_boundary_points(self, tmp_path, capsys):
        out_dir = str(tmp_path / "b")
        rc = main(["boundary", "MP", "--tau", "0.8", "--resolution", "200",
                   "--out-dir", out_dir])
        assert rc == 0
        rows = np.loadtxt(os.path.join(out_dir, "boundary_MP.csv"),
                          delimiter=",", skiprows=1)
        assert 150 <= rows.shape[0] <= 260
        srt = np.sort(rows, axis=1)
        np.testing.assert_allclose(srt[:, 2] - srt[:, 1], 0.6, atol=1e-9)

    def test_rejects_unknown_method(self, capsys):
        assert main(["boundary", "M9", "--tau", "0.8"]) == 2


class TestLetters:
    def test_prints_expected_value(self, capsys):
        assert main(["letters", "--acc", "1.0", "--eseq", "10"]) == 0
        assert capsys.readouterr().out.strip() == "1000"

    def test_literal_flag(self, capsys):
        assert main(["letters", "--acc", "0.9", "--eseq", "15.44",
                     "--literal-pseudocode"]) == 0
        assert capsys.readouterr().out.strip() == "169.84"


class TestSweepCommand:
    def test_writes_curve(self, tmp_path):
        out_dir = tmp_path / "sw"
        cfg = GOOD_CONFIG + f"out_dir = {out_dir}\n"
        rc = main(["sweep", write_config(tmp_path, cfg), "--tau-list", "0.7,0.8"])
        assert rc == 0
        lines = (out_dir / "sweep.csv").read_text().splitlines()
        assert lines[0] == "method,tau,mean_sequences,mean_accuracy"
        assert len(lines) == 1 + 3 * 2  # three configured methods, two taus


class TestBoundsCommand:
    def test_writes_bounds_table(self, tmp_path, capsys):
        out_dir = tmp_path / "bd"
        cfg = GOOD_CONFIG + f"out_dir = {out_dir}\n"
        rc = main(["bounds", write_config(tmp_path, cfg), "--s-range", "1:10"])
        assert rc == 0
        lines = (out_dir / "bounds.csv").read_text().splitlines()
        assert lines[0] == "s,tp_m1,tp_mp,tp_m2norm,fa_m1,fa_mp,fa_m1bar,ordering_ok"
        assert len(lines) == 11
        assert all(line.endswith("true") for line in lines[1:])


class TestTrajectoriesCommand:
    def test_writes_paths_and_mean(self, tmp_path):
        out_dir = tmp_path / "tr"
        cfg = GOOD_CONFIG + f"out_dir = {out_dir}\n"
        rc = main(["trajectories", write_config(tmp_path, cfg), "--paths", "7"])
        assert rc == 0
        mean_lines = (out_dir / "trajectory_mean.csv").read_text().splitlines()
        assert mean_lines[0] == "s,p1,p2,p3"
        assert len(mean_lines) == 1 + 9  # prior plus eight sequences
        path_lines = (out_dir / "trajectory_paths.csv").read_text().splitlines()
        assert len(path_lines) == 1 + 7 * 9
