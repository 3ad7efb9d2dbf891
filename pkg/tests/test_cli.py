"""
Command-line tests for mtrd
"""
import csv
import json
import math

import pytest

from mtrd.main import main


def read_rows(path):
    with path.open(newline="") as f:
        return list(csv.DictReader(f))


def last_json_line(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


class TestSpectrumCommand:
    """Test `mtrd spectrum`"""

    def test_uniform_bit_spectrum(self, bern_file, out_dir):
        code = main(["spectrum", "--model", str(bern_file), "--n-grid", "4,16", "--out-dir", str(out_dir)])
        assert code == 0
        rows = read_rows(out_dir / "spectrum.csv")
        assert [int(r["n"]) for r in rows] == [4, 16]
        assert all(r["value_nats"] == f"{math.log(2):.9f}" for r in rows)
        estimate = json.loads((out_dir / "estimate.json").read_text())
        assert estimate["sup_proxy"] == pytest.approx(math.log(2), abs=1e-9)

        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["command"] == "spectrum"
        assert set(manifest["outputs"]) == {str(out_dir / "spectrum.csv"), str(out_dir / "estimate.json")}

    def test_reruns_are_byte_identical(self, dsbs_file, tmp_path):
        args = ["spectrum", "--model", str(dsbs_file), "--kind", "mutual_info:X1|X2", "--n-grid", "6,12"]
        assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
        assert main(args + ["--out-dir", str(tmp_path / "b"), "--threads", "2"]) == 0
        assert (tmp_path / "a" / "spectrum.csv").read_bytes() == (tmp_path / "b" / "spectrum.csv").read_bytes()

    def test_bad_model_reports_pointer(self, write_json, out_dir, capsys):
        bad = write_json(
            "bad.json", {"alphabets": [{"name": "X1", "symbols": ["0", "1"]}], "kind": "iid", "joint": [0.5, 0.6]}
        )
        code = main(["spectrum", "--model", str(bad), "--n-grid", "4", "--out-dir", str(out_dir)])
        assert code == 2
        error = last_json_line(capsys)
        assert error["error"] == "SumNotOne"
        assert error["exit_code"] == 2
        assert error["schema_pointer"] == "/joint"
        assert not (out_dir / "manifest.json").exists()

    def test_unknown_kind(self, bern_file, out_dir, capsys):
        assert main(["spectrum", "--model", str(bern_file), "--kind", "bogus", "--n-grid", "4"]) == 2
        assert last_json_line(capsys)["error"] == "InputError"


class TestRegionCommands:
    """Test `mtrd region`, `mixed-region`, `wz` and `sw-check`"""

    def test_point_to_point_region(self, bern_file, out_dir):
        code = main(
            ["region", "--model", str(bern_file), "--D", "0.25", "--budget", "8", "--out-dir", str(out_dir)]
        )
        assert code == 0
        rows = read_rows(out_dir / "frontier.csv")
        assert min(float(r["R_1_nats"]) for r in rows) == pytest.approx(0.1308, abs=0.01)
        assert set(rows[0]) == {"R_1_nats", "bound_1_nats", "D_1"}
        dump = json.loads((out_dir / "frontier.json").read_text())
        assert dump["terminals"] == 1
        assert (out_dir / "manifest.json").exists()

    def test_infeasible_distortion_exit_code(self, bern_file, out_dir, capsys):
        code = main(["region", "--model", str(bern_file), "--D=-0.1", "--budget", "1", "--out-dir", str(out_dir)])
        assert code == 3
        assert last_json_line(capsys)["error"] == "InfeasibleDistortion"

    def test_region_rejects_mixed_model(self, mixed_file, out_dir):
        assert main(["region", "--model", str(mixed_file), "--budget", "1", "--out-dir", str(out_dir)]) == 2

    def test_mixed_region(self, mixed_file, out_dir, h_b):
        code = main(["mixed-region", "--model", str(mixed_file), "--budget", "8", "--out-dir", str(out_dir)])
        assert code == 0
        rows = read_rows(out_dir / "frontier.csv")
        assert min(float(r["R_1_nats"]) for r in rows) == pytest.approx(h_b(0.4), abs=1e-6)

    def test_sw_check(self, dsbs_file, out_dir, capsys, h_b):
        assert main(["sw-check", "--model", str(dsbs_file), "--out-dir", str(out_dir)]) == 0
        bounds = last_json_line(capsys)
        assert bounds["1"] == pytest.approx(h_b(0.11), abs=1e-8)
        assert bounds["12"] == pytest.approx(math.log(2) + h_b(0.11), abs=1e-8)
        assert len(read_rows(out_dir / "sw_bounds.csv")) == 3

    def test_wyner_ziv(self, write_json, out_dir):
        q = 0.5
        model = write_json(
            "wz.json",
            {
                "alphabets": [{"name": "X1", "symbols": ["0", "1"]}, {"name": "S", "symbols": ["0", "1"]}],
                "kind": "iid",
                "side_info": "S",
                "joint": [[(1 - q) / 2, q / 2], [q / 2, (1 - q) / 2]],
            },
        )
        code = main(["wz", "--model", str(model), "--D", "0.25", "--budget", "8", "--out-dir", str(out_dir)])
        assert code == 0
        rows = read_rows(out_dir / "wz.csv")
        assert float(rows[0]["rate_nats"]) == pytest.approx(0.1308, abs=0.01)

    def test_distortion_rate(self, bern_file, out_dir, h_b):
        code = main(
            [
                "dr", "--model", str(bern_file), "--rates", "0.2", "--aux-size", "2", "--budget", "2",
                "--out-dir", str(out_dir),
            ]
        )  # fmt: skip
        assert code == 0
        rows = read_rows(out_dir / "dr.csv")
        assert set(rows[0]) == {"R_1_nats", "D_1", "bound_1_nats"}
        D = min(float(r["D_1"]) for r in rows)
        assert h_b(D) == pytest.approx(math.log(2) - 0.2, abs=1e-4)
        assert json.loads((out_dir / "manifest.json").read_text())["command"] == "dr"

    def test_distortion_rate_needs_one_rate_per_terminal(self, dsbs_file, out_dir, capsys):
        assert main(["dr", "--model", str(dsbs_file), "--rates", "0.5", "--out-dir", str(out_dir)]) == 2
        assert last_json_line(capsys)["schema_pointer"] == "/rates"

    def test_reruns_are_byte_identical(self, bern_file, tmp_path):
        args = ["region", "--model", str(bern_file), "--D", "0.1", "--budget", "3", "--seed", "5"]
        assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
        assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "frontier.csv").read_bytes() == (tmp_path / "b" / "frontier.csv").read_bytes()


class TestSimulateCommand:
    """Test `mtrd simulate`"""

    def test_smoke_run(self, dsbs_file, out_dir):
        code = main(
            [
                "simulate", "--model", str(dsbs_file), "--rates", "0.5,0.85", "--n-grid", "4,6",
                "--trials", "1", "--out-dir", str(out_dir),
            ]
        )  # fmt: skip
        assert code == 0
        rows = read_rows(out_dir / "results.csv")
        assert [r["n"] for r in rows] == ["4", "6"]
        assert all(r["trials"] == "1" for r in rows)
        assert "mean_d_2" in rows[0]
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["outputs"] == [str(out_dir / "results.csv")]

    def test_config_file_with_overrides(self, dsbs_file, write_json, out_dir):
        config = write_json(
            "experiment.json",
            {"model": str(dsbs_file), "rates": [0.5, 0.85], "n_grid": [4], "trials": 3, "seed": 9},
        )
        assert main(["simulate", "--config", str(config), "--trials", "2", "--out-dir", str(out_dir)]) == 0
        rows = read_rows(out_dir / "results.csv")
        assert rows[0]["trials"] == "2"
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["seed"] == 9
        assert manifest["config_path"] == str(config)

    def test_replays_frontier(self, bern_file, tmp_path):
        region_dir = tmp_path / "region"
        region_args = ["region", "--model", str(bern_file), "--D", "0.25", "--budget", "2"]
        assert main(region_args + ["--out-dir", str(region_dir)]) == 0
        points = json.loads((region_dir / "frontier.json").read_text())["points"]
        sim_dir = tmp_path / "sim"
        code = main(
            [
                "simulate", "--model", str(bern_file), "--rates-from", str(region_dir / "frontier.json"),
                "--D", "0.25", "--n-grid", "4", "--trials", "2", "--out-dir", str(sim_dir),
            ]
        )  # fmt: skip
        assert code == 0
        assert len(read_rows(sim_dir / "results.csv")) == len(points)

    def test_budget_exceeded_keeps_partial_results(self, dsbs_file, out_dir, capsys):
        code = main(
            [
                "simulate", "--model", str(dsbs_file), "--rates", "0.5,0.85", "--n-grid", "4,40",
                "--trials", "1", "--out-dir", str(out_dir),
            ]
        )  # fmt: skip
        assert code == 4
        assert last_json_line(capsys)["error"] == "BudgetExceeded"
        assert len(read_rows(out_dir / "results.csv")) == 1
        assert not (out_dir / "manifest.json").exists()

    def test_wrong_rate_count(self, dsbs_file, out_dir, capsys):
        args = ["simulate", "--model", str(dsbs_file), "--rates", "0.5", "--n-grid", "4"]
        code = main(args + ["--out-dir", str(out_dir)])
        assert code == 2
        assert last_json_line(capsys)["schema_pointer"] == "/rates"

    def test_needs_a_model(self, out_dir):
        assert main(["simulate", "--n-grid", "4", "--out-dir", str(out_dir)]) == 2

    def test_negative_rates_are_input_errors(self, bern_file, out_dir, capsys):
        args = ["simulate", "--model", str(bern_file), "--rates=-0.1", "--n-grid", "4", "--trials", "1"]
        assert main(args + ["--out-dir", str(out_dir)]) == 2
        error = last_json_line(capsys)
        assert error["error"] == "InputError"
        assert error["schema_pointer"] == "/rates"
        assert not (out_dir / "results.csv").exists()
