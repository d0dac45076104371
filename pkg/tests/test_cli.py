import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from triclock.analysis import FixedPointRecord
from triclock.basin import read_grid_binary
from triclock.cli import main
from triclock.events import read_events_jsonl

PI = math.pi


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


# ---------------------------------------------------------------------------
# step
# ---------------------------------------------------------------------------

class TestStep:
    def test_fixed_point_rows_identical_within_rounding(self, capsys):
        code, out, _ = run_cli(
            capsys, "step", "--x", "2.0944", "--y", "4.1888", "--eps", "0.05", "-n", "10"
        )
        assert code == 0
        rows = parse_csv(out)
        assert rows[0] == ["x", "y"]
        assert len(rows) == 11
        values = np.array([[float(a), float(b)] for a, b in rows[1:]])
        assert np.max(np.abs(values - values[0])) < 1e-3

    def test_single_step_value(self, capsys):
        code, out, _ = run_cli(
            capsys, "step", "--x", "1.5708", "--y", "4.7124", "--eps", "0.01", "-n", "1"
        )
        assert code == 0
        row = parse_csv(out)[1]
        assert float(row[0]) == pytest.approx(1.5808, abs=1e-4)
        assert float(row[1]) == pytest.approx(4.7024, abs=1e-4)

    def test_missing_coordinate_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "step", "--x", "1.0", "--eps", "0.05")
        assert code == 2
        assert "--y" in err

    def test_json_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "step", "--x", "1.0", "--y", "2.0", "--eps", "0.05", "-n", "3",
            "--format", "json",
        )
        assert code == 0
        assert len(json.loads(out)["orbit"]) == 3

    def test_degrees_flag(self, capsys):
        _, out_rad, _ = run_cli(capsys, "step", "--x", str(PI), "--y", str(PI), "--eps", "0.05")
        _, out_deg, _ = run_cli(
            capsys, "step", "--x", "180", "--y", "180", "--eps", "0.05", "--deg"
        )
        a = [float(v) for v in parse_csv(out_rad)[1]]
        b = [float(v) for v in parse_csv(out_deg)[1]]
        assert a == pytest.approx(b, abs=1e-12)

    def test_unknown_format_rejected(self, capsys):
        code, _, _ = run_cli(
            capsys, "step", "--x", "1", "--y", "2", "--eps", "0.05", "--format", "yaml"
        )
        assert code == 2


# ---------------------------------------------------------------------------
# fixed-points
# ---------------------------------------------------------------------------

class TestFixedPoints:
    def test_json_census(self, capsys):
        code, out, _ = run_cli(capsys, "fixed-points", "--eps", "0.05")
        assert code == 0
        payload = json.loads(out)
        records = payload["fixed_points"]
        assert len(records) == 11
        kinds = [r["kind"] for r in records]
        assert kinds.count("attractor") == 2
        assert kinds.count("repeller") == 4
        assert kinds.count("saddle") == 5
        # lossless report round trip
        for r in records:
            rec = FixedPointRecord.from_dict(r)
            assert rec.to_dict() == r

    def test_csv_table(self, capsys):
        code, out, _ = run_cli(capsys, "fixed-points", "--eps", "0.05", "--format", "csv")
        assert code == 0
        rows = parse_csv(out)
        assert rows[0] == ["x", "y", "eig_1", "eig_2", "class"]
        assert len(rows) == 12

    def test_coupling_bound_refused(self, capsys):
        code, _, err = run_cli(capsys, "fixed-points", "--eps", "0.2")
        assert code == 2
        assert "1/9" in err

    def test_zero_coupling_refused(self, capsys):
        code, _, _ = run_cli(capsys, "fixed-points", "--eps", "0.0")
        assert code == 2


# ---------------------------------------------------------------------------
# basins
# ---------------------------------------------------------------------------

class TestBasins:
    def test_csv_grid(self, capsys):
        code, out, _ = run_cli(capsys, "basins", "--eps", "0.05", "--resolution", "6")
        assert code == 0
        blocks = out.split("\n\n")
        labels = blocks[0].splitlines()
        assert len(labels) == 6
        assert all(len(r.split(",")) == 6 for r in labels)

    def test_counts_balanced(self, capsys):
        _, out, _ = run_cli(capsys, "basins", "--eps", "0.05", "--resolution", "40")
        labels = [row.split(",") for row in out.split("\n\n")[0].splitlines()]
        flat = [v for row in labels for v in row]
        upper, lower = flat.count("upper"), flat.count("lower")
        assert upper == lower

    def test_binary_output(self, capsys, tmp_path):
        target = tmp_path / "grid.bin"
        code, _, _ = run_cli(
            capsys, "basins", "--eps", "0.05", "--resolution", "8",
            "--format", "bin", "--out", str(target),
        )
        assert code == 0
        with open(target, "rb") as fh:
            grid = read_grid_binary(fh)
        assert grid.resolution == 8

    def test_svg_output(self, capsys):
        code, out, _ = run_cli(
            capsys, "basins", "--eps", "0.05", "--resolution", "12", "--format", "svg"
        )
        assert code == 0
        assert out.startswith('<?xml') and "#dbe9f6" in out and "#fbe8d3" in out


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

class TestSimulate:
    def test_three_clock_lock_report(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--eps", "0.05", "--phases", "0,2.0,4.0",
            "--tol", "1e-8", "--splay-tol", "1e-6",
        )
        assert code == 0
        report = json.loads(out)
        run = report["runs"][0]
        assert run["locked"] and run["near_splay"]
        assert run["splay_distance"] < 1e-6
        assert report["summary"]["near_splay_fraction"] == 1.0

    def test_diagonal_start_saddle_configuration(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--eps", "0.05", "--phases", "0,2.5,2.5", "--tol", "1e-8"
        )
        assert code == 0
        run = json.loads(out)["runs"][0]
        assert run["locked"] and not run["near_splay"]
        x, y = run["differences"]
        assert x == y
        assert abs(x - PI) < 1e-3

    def test_five_clock_exploration(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--eps", "0.02", "--n-clocks", "5",
            "--random-starts", "3", "--seed", "1", "--max-cycles", "400",
        )
        assert code == 0
        report = json.loads(out)
        assert len(report["runs"]) == 3
        assert all(len(r["differences"]) == 4 for r in report["runs"])

    def test_too_few_clocks(self, capsys):
        code, _, _ = run_cli(capsys, "simulate", "--eps", "0.05", "--n-clocks", "1")
        assert code == 2

    def test_phases_arity_checked(self, capsys):
        code, _, _ = run_cli(capsys, "simulate", "--eps", "0.05", "--phases", "0,1.0")
        assert code == 2

    def test_phases_and_random_conflict(self, capsys):
        code, _, _ = run_cli(
            capsys, "simulate", "--eps", "0.05", "--phases", "0,1,2", "--random-starts", "5"
        )
        assert code == 2

    def test_trace_jsonl(self, capsys, tmp_path):
        target = tmp_path / "trace.jsonl"
        code, _, _ = run_cli(
            capsys, "simulate", "--eps", "0.05", "--phases", "0,2.0,4.0",
            "--max-cycles", "5", "--tol", "1e-20", "--trace-out", str(target),
        )
        assert code == 0
        with open(target, encoding="utf-8") as fh:
            events = read_events_jsonl(fh)
        assert len(events) == 15  # 3 kicks per cycle, 5 cycles
        assert events[0].cycle_index == 0 and events[-1].cycle_index == 4

    def test_trace_csv(self, capsys, tmp_path):
        target = tmp_path / "trace.csv"
        code, _, _ = run_cli(
            capsys, "simulate", "--eps", "0.05", "--phases", "0,2.0,4.0",
            "--max-cycles", "2", "--tol", "1e-20", "--trace-out", str(target),
        )
        assert code == 0
        rows = target.read_text().strip().splitlines()
        assert rows[0] == "cycle_index,kicker,psi_1,psi_2,psi_3"
        assert len(rows) == 7

    def test_trace_needs_single_start(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "simulate", "--eps", "0.05", "--random-starts", "2",
            "--trace-out", str(tmp_path / "x.jsonl"),
        )
        assert code == 2


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

class TestVerify:
    @pytest.mark.parametrize("eps", ["0.05", "0.10"])
    def test_passes_under_coupling_bound(self, capsys, eps):
        code, out, _ = run_cli(
            capsys, "verify", "--eps", eps, "--samples", "400", "--grid", "120"
        )
        assert code == 0
        assert out.strip().endswith("PASS")

    def test_json_report(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--eps", "0.05", "--samples", "200", "--grid", "100",
            "--format", "json",
        )
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        assert report["census"]["counts"] == {"sa": 6, "rs": 10, "ra": 2}
        assert len(report["segments"]) == 10
        assert json.loads(json.dumps(report)) == report

    def test_zero_coupling_refused(self, capsys):
        code, _, _ = run_cli(capsys, "verify", "--eps", "0.0")
        assert code == 2


# ---------------------------------------------------------------------------
# andronov
# ---------------------------------------------------------------------------

class TestAndronov:
    def test_convergence_table(self, capsys):
        code, out, _ = run_cli(
            capsys, "andronov", "--mu", "0.1", "--h", "1", "--v0", "5", "--steps", "200"
        )
        assert code == 0
        rows = parse_csv(out)
        assert rows[0] == ["n", "v", "v_minus_fixed_point"]
        assert float(rows[-1][1]) == pytest.approx(1.45, abs=1e-10)

    def test_fixed_start_is_constant_column(self, capsys):
        _, out, _ = run_cli(
            capsys, "andronov", "--mu", "0.1", "--h", "1", "--v0", "1.45", "--steps", "20"
        )
        values = {row[1] for row in parse_csv(out)[1:]}
        assert len(values) == 1

    def test_basin_boundary_is_domain_error(self, capsys):
        code, _, err = run_cli(capsys, "andronov", "--mu", "0.1", "--h", "1", "--v0", "0.4")
        assert code == 2
        assert "4*mu" in err


# ---------------------------------------------------------------------------
# portrait
# ---------------------------------------------------------------------------

class TestPortrait:
    def test_deterministic_svg(self, capsys):
        args = ["portrait", "--eps", "0.05", "--resolution", "16",
                "--layers", "basin_background,fixed_points"]
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_layer_subset(self, capsys):
        code, out, _ = run_cli(capsys, "portrait", "--eps", "0.05", "--layers", "fixed_points")
        assert code == 0
        assert out.count("<circle") == 11 and "<rect" not in out

    def test_sample_orbits_layer(self, capsys):
        code, out, _ = run_cli(
            capsys, "portrait", "--eps", "0.05", "--layers", "fixed_points,sample_orbits"
        )
        assert code == 0
        assert "polyline" in out

    def test_unknown_layer_rejected(self, capsys):
        code, _, _ = run_cli(capsys, "portrait", "--eps", "0.05", "--layers", "bogus")
        assert code == 2


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

class TestPlumbing:
    def test_config_file_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps = 0.05\ncount = 2\n# a comment\n")
        code, out, _ = run_cli(
            capsys, "step", "--x", "1.0", "--y", "2.0", "--config", str(cfg)
        )
        assert code == 0
        assert len(parse_csv(out)) == 3

    def test_cli_overrides_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps = 0.2\n")
        code, _, _ = run_cli(
            capsys, "fixed-points", "--eps", "0.05", "--config", str(cfg), "--seed-grid", "12"
        )
        assert code == 0

    def test_config_value_used_when_flag_absent(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("eps = 0.2\n")
        code, _, err = run_cli(capsys, "fixed-points", "--config", str(cfg))
        assert code == 2
        assert "1/9" in err

    def test_missing_config_is_usage_error(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "step", "--x", "1", "--y", "2", "--eps", "0.05",
            "--config", str(tmp_path / "absent.cfg"),
        )
        assert code == 2

    def test_malformed_config_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a pair\n")
        code, _, _ = run_cli(
            capsys, "step", "--x", "1", "--y", "2", "--eps", "0.05", "--config", str(cfg)
        )
        assert code == 2

    def test_outdir_env_redirects_relative_paths(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("TRICLOCK_OUTDIR", str(tmp_path))
        code, out, _ = run_cli(
            capsys, "step", "--x", "1", "--y", "2", "--eps", "0.05", "--out", "orbit.csv"
        )
        assert code == 0
        assert out == ""
        assert (tmp_path / "orbit.csv").exists()

    def test_unwritable_path_is_io_error(self, capsys):
        code, _, _ = run_cli(
            capsys, "step", "--x", "1", "--y", "2", "--eps", "0.05",
            "--out", "/proc/definitely/not/writable.csv",
        )
        assert code == 1

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "triclock.cli", "step", "--x", "1.0", "--y", "2.0",
             "--eps", "0.05"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("x,y")
