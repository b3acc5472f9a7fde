"""Command line pipeline, file formats, schemas, and exit codes."""

import json

import numpy as np
import pytest

import jsonschema

from freqca import load_trajectory
from freqca.cli import main
from freqca.reports import (
    validate_dynamics,
    validate_run_report,
    validate_sweep,
)

SMALL_MODEL = {
    "layers": 3,
    "channels": 16,
    "tokens": 5,
    "heads": 2,
    "seed": 42,
    "embed_dim": 8,
}


def write_config(path, model=None, sampler=None, policy=None):
    doc = {
        "model": {**SMALL_MODEL, **(model or {})},
        "sampler": {"steps": 20, "noise_seed": 42, **(sampler or {})},
    }
    if policy is not None:
        doc["policy"] = policy
    path.write_text(json.dumps(doc))
    return path


class TestRunCommand:
    def test_run_writes_valid_reports(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", policy={"interval": 5})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        doc = json.loads((out / "run_freqca.json").read_text())
        validate_run_report(doc)
        assert (out / "run_freqca.csv").read_text().startswith("step,kind,")
        assert "freqca:" in capsys.readouterr().out

    def test_run_with_all_baselines(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", policy={"interval": 5})
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--config",
                str(cfg),
                "--baseline",
                "fora",
                "--baseline",
                "taylor",
                "--baseline",
                "layerwise",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        for name in ("freqca", "fora", "taylor", "layerwise"):
            validate_run_report(json.loads((out / f"run_{name}.json").read_text()))
        printed = capsys.readouterr().out
        assert all(f"{n}:" in printed for n in ("freqca", "fora", "taylor", "layerwise"))

    def test_default_policy_beats_whole_feature_reuse(self, tmp_path):
        # Default model and policy, seed 42: band-split caching must not
        # lose to freezing the whole feature.
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps({"model": {"seed": 42}, "sampler": {"noise_seed": 42}})
        )
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--baseline", "fora", "--out", str(out)]) == 0
        ours = json.loads((out / "run_freqca.json").read_text())["summary"]["mean_mse"]
        fora = json.loads((out / "run_fora.json").read_text())["summary"]["mean_mse"]
        assert ours <= fora

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", policy={"interval": 4})
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg), "--out", str(out_a)]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(out_b)]) == 0
        assert (out_a / "run_freqca.json").read_bytes() == (out_b / "run_freqca.json").read_bytes()
        assert (out_a / "run_freqca.csv").read_bytes() == (out_b / "run_freqca.csv").read_bytes()


class TestConfigErrors:
    def test_missing_seed_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": {"layers": 2}, "sampler": {"noise_seed": 0}}))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "model.seed" in capsys.readouterr().err

    def test_negative_interval_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", policy={"interval": -2})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "policy.interval" in capsys.readouterr().err

    def test_bad_transform_enum_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", policy={"transform": "wavelet"})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "policy.transform" in capsys.readouterr().err

    def test_unknown_field_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {"model": {"seed": 0, "depth": 9}, "sampler": {"noise_seed": 0}}
            )
        )
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "model.depth" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 2

    def test_interval_beyond_steps_exits_2(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", policy={"interval": 99})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


class TestDumpAnalyze:
    def test_dump_then_analyze(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        traj = tmp_path / "run.fqca"
        assert main(["dump", "--config", str(cfg), "--out", str(traj)]) == 0
        outputs, header = load_trajectory(traj)
        assert outputs.shape == (20, 5, 16)
        assert header["seed"] == 42

        out = tmp_path / "dyn"
        code = main(
            [
                "analyze",
                "--traj",
                str(traj),
                "--intervals",
                "1..6",
                "--cutoff",
                "0.25",
                "--transform",
                "dct",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        doc = json.loads((out / "dynamics.json").read_text())
        validate_dynamics(doc)
        assert doc["intervals"] == [1, 2, 3, 4, 5, 6]
        assert len(doc["low_similarity"]["6"]) == 14
        assert "low_mean" in capsys.readouterr().out

    def test_dump_deterministic(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        a, b = tmp_path / "a.fqca", tmp_path / "b.fqca"
        assert main(["dump", "--config", str(cfg), "--out", str(a)]) == 0
        assert main(["dump", "--config", str(cfg), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_analyze_missing_file_exits_2(self, tmp_path):
        code = main(
            ["analyze", "--traj", str(tmp_path / "no.fqca"), "--out", str(tmp_path / "d")]
        )
        assert code == 2

    def test_analyze_corrupt_file_exits_3(self, tmp_path):
        bad = tmp_path / "bad.fqca"
        bad.write_bytes(b"JUNKJUNKJUNKJUNK")
        assert main(["analyze", "--traj", str(bad), "--out", str(tmp_path / "d")]) == 3

    def test_analyze_interval_list_syntax(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        traj = tmp_path / "run.fqca"
        main(["dump", "--config", str(cfg), "--out", str(traj)])
        out = tmp_path / "dyn"
        assert main(["analyze", "--traj", str(traj), "--intervals", "2,4", "--out", str(out)]) == 0
        doc = json.loads((out / "dynamics.json").read_text())
        assert doc["intervals"] == [2, 4]

    def test_analyze_bad_interval_syntax_exits_2(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        traj = tmp_path / "run.fqca"
        main(["dump", "--config", str(cfg), "--out", str(traj)])
        code = main(
            ["analyze", "--traj", str(traj), "--intervals", "abc", "--out", str(tmp_path / "d")]
        )
        assert code == 2


class TestSweepCommand:
    def test_sweep_writes_valid_report(self, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text(
            json.dumps(
                {
                    "model": SMALL_MODEL,
                    "sampler": {"steps": 12, "noise_seed": 1},
                    "grid": {
                        "transforms": ["dct", "none"],
                        "low_orders": [0],
                        "high_orders": [0, 2],
                        "intervals": [3, 4],
                    },
                }
            )
        )
        out = tmp_path / "sw"
        assert main(["sweep", "--grid", str(grid), "--out", str(out)]) == 0
        doc = json.loads((out / "sweep.json").read_text())
        validate_sweep(doc)
        assert len(doc["cells"]) == 2 * 1 * 2 * 2
        assert set(doc["best_by_interval"]) == {"3", "4"}
        printed = capsys.readouterr().out
        assert "interval=3" in printed and "interval=4" in printed

    def test_sweep_rerun_byte_identical(self, tmp_path):
        grid = tmp_path / "grid.json"
        grid.write_text(
            json.dumps(
                {
                    "model": SMALL_MODEL,
                    "sampler": {"steps": 10, "noise_seed": 2},
                    "grid": {"transforms": ["dct"], "low_orders": [0], "high_orders": [2], "intervals": [5]},
                }
            )
        )
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["sweep", "--grid", str(grid), "--out", str(a)]) == 0
        assert main(["sweep", "--grid", str(grid), "--out", str(b)]) == 0
        assert (a / "sweep.json").read_bytes() == (b / "sweep.json").read_bytes()

    def test_bad_grid_order_exits_2(self, tmp_path, capsys):
        grid = tmp_path / "grid.json"
        grid.write_text(
            json.dumps(
                {
                    "model": SMALL_MODEL,
                    "sampler": {"steps": 10, "noise_seed": 2},
                    "grid": {"high_orders": [7]},
                }
            )
        )
        assert main(["sweep", "--grid", str(grid), "--out", str(tmp_path / "o")]) == 2
        assert "grid.high_orders" in capsys.readouterr().err


class TestSchemas:
    def test_run_schema_rejects_missing_summary_field(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        doc = json.loads((out / "run_freqca.json").read_text())
        del doc["summary"]["speedup"]
        with pytest.raises(jsonschema.ValidationError):
            validate_run_report(doc)

    def test_run_schema_rejects_extra_field(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        doc = json.loads((out / "run_freqca.json").read_text())
        doc["timestamp"] = "2026-01-01"
        with pytest.raises(jsonschema.ValidationError):
            validate_run_report(doc)

    def test_csv_row_count_matches_steps(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        rows = (out / "run_freqca.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 20

    def test_csv_floats_round_trip(self, tmp_path):
        # repr-based float cells must parse back to the exact JSON values.
        cfg = write_config(tmp_path / "cfg.json", policy={"interval": 5})
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        doc = json.loads((out / "run_freqca.json").read_text())
        rows = (out / "run_freqca.csv").read_text().strip().splitlines()[1:]
        for rec, row in zip(doc["per_step"], rows):
            cells = row.split(",")
            assert float(cells[2]) == rec["mse_vs_truth"]
            assert float(cells[3]) == rec["cosine_vs_truth"]
