import csv
import io
import json
import subprocess
import sys

import pytest

from coupled_ground.cli import RESULT_COLUMNS, fmt, main, parse_config

BASE = {"dim": 3, "p": 4, "q": 4, "r1": 1.75, "r2": 1.75, "mu1": 1, "mu2": 1, "beta": 1, "a": 1, "b": 1}


def write_config(tmp_path, **overrides):
    cfg = {k: v for k, v in {**BASE, **overrides}.items() if v is not None}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestFormatting:
    def test_float_format(self):
        assert fmt(1 / 3) == "0.333333333333"
        assert fmt(True) == "true" and fmt(7) == "7"

    def test_defaults(self):
        run = parse_config({k: v for k, v in BASE.items() if k != "dim"})
        assert (run.params.dim, run.radius, run.points) == (3, 15.0, 1501)
        assert (run.tol_residual, run.max_iters, run.seed_mode) == (1e-4, 20000, "scalar_seed")


class TestExitCodes:
    def test_scalar(self, capsys):
        assert main(["scalar", "--dim", "1", "--p", "4", "--a", "2", "--format", "csv"]) == 0
        out = rows(capsys.readouterr().out)[0]
        assert float(out["mass_sq"]) == pytest.approx(4.0, abs=1e-4)
        assert float(out["lambda"]) == pytest.approx(0.25, rel=1e-6)

    def test_scalar_outside_window(self, capsys):
        assert main(["scalar", "--dim", "3", "--p", "7"]) == 2
        assert "error" in capsys.readouterr().err

    @pytest.mark.parametrize("key", ["b", "beta", "r2"])
    def test_missing_key_named(self, tmp_path, capsys, key):
        assert main(["solve", write_config(tmp_path, **{key: None})]) == 2
        assert key in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        assert main(["solve", write_config(tmp_path, colour="red")]) == 2
        assert "colour" in capsys.readouterr().err

    def test_bad_json_and_missing_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["constants", str(bad)]) == 2
        assert main(["constants", str(tmp_path / "absent.json")]) == 2

    def test_invalid_physics(self, tmp_path):
        assert main(["solve", write_config(tmp_path, p=7)]) == 2
        assert main(["solve", write_config(tmp_path, seed_mode="random")]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_non_convergence(self, tmp_path, capsys):
        assert main(["solve", write_config(tmp_path, max_iters=1)]) == 3
        out = rows(capsys.readouterr().out)[0]
        assert out["converged"] == "false"

    def test_sweep_bad_key(self, tmp_path):
        assert main(["sweep", write_config(tmp_path), "--vary", "p", "--values", "4"]) == 2
        assert main(["sweep", write_config(tmp_path), "--vary", "a", "--values", "x"]) == 2


class TestCommands:
    def test_constants(self, tmp_path, capsys):
        assert main(["constants", write_config(tmp_path), "--format", "csv"]) == 0
        out = rows(capsys.readouterr().out)[0]
        assert float(out["b_star"]) == pytest.approx(1.0, rel=1e-12)
        assert float(out["m_p"]) == float(out["m_q"]) > 0

    def test_beta_three_dimensions(self, capsys):
        assert main(["beta", "--dim", "3", "--p", "4", "--r", "2", "--format", "csv"]) == 0
        out = rows(capsys.readouterr().out)[0]
        assert float(out["lower"]) <= float(out["beta_star"]) <= float(out["upper"])

    def test_beta_one_dimension(self, capsys):
        assert main(["beta", "--dim", "1", "--p", "8", "--radii", "10,20"]) == 0
        text = capsys.readouterr().out
        assert "beta_estimate" in text and text.strip().splitlines()[-1].startswith("20")

    def test_solve_files_and_determinism(self, tmp_path):
        cfg = write_config(tmp_path)
        outs = []
        for k in range(2):
            out, prof = tmp_path / f"res{k}.csv", tmp_path / f"prof{k}.csv"
            assert main(["solve", cfg, "--out", str(out), "--profiles", str(prof)]) == 0
            outs.append((out.read_bytes(), prof.read_bytes()))
        assert outs[0] == outs[1]
        header = outs[0][0].decode().splitlines()[0]
        assert tuple(header.split(",")) == RESULT_COLUMNS
        profile = rows(outs[0][1].decode())
        assert len(profile) == 1501 and float(profile[0]["r"]) == 0.0 and float(profile[-1]["r"]) == 15.0
        row = rows(outs[0][0].decode())[0]
        assert row["converged"] == "true" and float(row["strict_margin"]) > 0

    def test_sweep_order(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["sweep", cfg, "--vary", "beta", "--values", "10,1,2", "--jobs", "3"]) == 0
        par = capsys.readouterr().out
        assert [float(r["beta"]) for r in rows(par)] == [10.0, 1.0, 2.0]
        assert main(["sweep", cfg, "--vary", "beta", "--values", "10,1,2", "--jobs", "1"]) == 0
        assert capsys.readouterr().out == par


def test_streams_separated(tmp_path):
    cfg = write_config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "coupled_ground", "-v", "solve", cfg],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("a,b,beta")
    assert "start:" in proc.stderr and "start:" not in proc.stdout
