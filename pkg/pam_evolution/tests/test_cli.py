"""
Tests for the command-line entry point.
"""
import json

import pytest

from src.cli import build_overrides, build_parser, main


@pytest.fixture
def tiny_config_file(tmp_path, make_config):
    path = tmp_path / "tiny.json"
    config = make_config(predictor={"mode": "perfect_oracle"})
    path.write_text(config.model_dump_json(exclude={"out_dir", "seed"}), encoding="utf-8")
    return path


class TestParser:

    def test_oracle_accuracy_implies_noisy_mode(self):
        args = build_parser().parse_args(["run", "--oracle-accuracy", "0.8"])
        overrides = build_overrides(args)
        assert overrides["predictor.mode"] == "noisy_oracle"
        assert overrides["predictor.accuracy"] == 0.8

    def test_unknown_strategy_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run", "--strategy", "greedy"])


class TestCommands:

    def test_bad_log_level_exits_with_status_2(self, monkeypatch, tmp_path, capsys):
        monkeypatch.setenv("PAM_LOG_LEVEL", "LOUD")
        code = main(["hillclimb-check", "--qs", "0.1", "--accuracies", "0.8", "--out-dir", str(tmp_path / "hc")])
        assert code == 2
        assert "PAM_LOG_LEVEL" in capsys.readouterr().err

    def test_hillclimb_check(self, tmp_path, capsys):
        code = main([
            "hillclimb-check", "--qs", "0.1", "--accuracies", "0.8",
            "--max-attempts", "64", "--trials", "20000", "--surface", "--out-dir", str(tmp_path / "hc"),
        ])
        assert code == 0
        assert (tmp_path / "hc" / "hillclimb.csv").read_text().startswith("q,a,p_accept")
        assert len((tmp_path / "hc" / "surface.csv").read_text().splitlines()) == 99 * 6 + 1
        assert "0.1" in capsys.readouterr().out

    def test_run_then_aggregate(self, tmp_path, tiny_config_file):
        for seed in (0, 1):
            code = main([
                "run", "--config", str(tiny_config_file), "--seed", str(seed),
                "--out-dir", str(tmp_path / "runs" / f"seed{seed}"),
            ])
            assert code == 0
        summary = json.loads((tmp_path / "runs" / "seed1" / "summary.json").read_text())
        assert summary["predictor"] == "perfect_oracle"

        code = main([
            "aggregate", str(tmp_path / "runs" / "seed0"), str(tmp_path / "runs" / "seed1"),
            "--thresholds", "0.5", "0.99",
        ])
        assert code == 0
        assert (tmp_path / "runs" / "aggregate.csv").exists()
        assert (tmp_path / "runs" / "thresholds.csv").exists()

    def test_bad_config_exits_with_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"population_size": 0}), encoding="utf-8")
        assert main(["run", "--config", str(bad), "--out-dir", str(tmp_path / "x")]) == 2
        assert "Invalid experiment configuration" in capsys.readouterr().err

    def test_missing_config_exits_with_two(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2

    def test_aggregate_single_run_fails(self, tmp_path, tiny_config_file):
        assert main(["run", "--config", str(tiny_config_file), "--out-dir", str(tmp_path / "only")]) == 0
        assert main(["aggregate", str(tmp_path / "only")]) == 2
