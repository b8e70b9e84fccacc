import json

import numpy as np
import pytest

from amcl.cli import main
from amcl.config import apply_override, build_train_config, load_config
from amcl.errors import ConfigError
from amcl.network import HypothesisBank

SMALL_CONFIG = """
[run]
method = "amcl"
seed = 3
epochs = 6
batch_size = 256
learning_rate = 0.05
eval_every = 2
n_hypotheses = 2

[network]
hidden = [8]
head_activation = "tanh"

[schedule]
kind = "exponential"
t0 = 0.1
rho = 0.8
floor = 5e-4

[data]
kind = "two_point"
pool_size = 1024
validation_size = 256
"""


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(SMALL_CONFIG)
    return p


class TestConfig:
    def test_load_and_build(self, config_path):
        raw = load_config(config_path)
        cfg = build_train_config(raw)
        assert cfg.method == "amcl"
        assert cfg.hidden == (8,)
        assert cfg.schedule.t0 == 0.1

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[runs]\nmethod = 'mcl'\n")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[run]\nmethodd = 'mcl'\n")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_type_check(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[run]\nepochs = 'many'\n")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.toml")

    def test_override(self, config_path):
        raw = load_config(config_path)
        apply_override(raw, "run.epochs=3")
        assert raw["run"]["epochs"] == 3
        apply_override(raw, "schedule.kind=linear")
        assert raw["schedule"]["kind"] == "linear"
        with pytest.raises(ConfigError):
            apply_override(raw, "run.epochs")
        with pytest.raises(ConfigError):
            apply_override(raw, "run.bogus=1")


class TestTrainCommand:
    def test_artifacts_written(self, config_path, tmp_path):
        out = tmp_path / "out"
        code = main(["train", "--config", str(config_path), "--out", str(out)])
        assert code == 0
        for name in ("trajectory.csv", "eval.csv", "checkpoint.npz", "manifest.json"):
            assert (out / name).is_file()
        lines = (out / "trajectory.csv").read_text().strip().split("\n")
        assert lines[0].startswith("epoch,temperature")
        assert len(lines) >= 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 3
        assert manifest["config"]["run"]["method"] == "amcl"
        assert manifest["wall_time_s"] > 0

    def test_manifest_replay_reproduces_checkpoint(self, config_path, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["train", "--config", str(config_path), "--out", str(out_a)]) == 0
        code = main(
            ["train", "--config", str(out_a / "manifest.json"), "--out", str(out_b)]
        )
        assert code == 0
        bank_a = HypothesisBank.load(out_a / "checkpoint.npz")
        bank_b = HypothesisBank.load(out_b / "checkpoint.npz")
        for key in bank_a.params:
            assert np.array_equal(bank_a.params[key], bank_b.params[key])

    def test_seed_flag_overrides_config(self, config_path, tmp_path):
        out = tmp_path / "out"
        main(["train", "--config", str(config_path), "--out", str(out), "--seed", "9"])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 9

    def test_bad_config_exit_code(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[run]\nmethod = 'warp'\n")
        assert main(["train", "--config", str(p), "--out", str(tmp_path / "o")]) == 1


class TestSweepCommand:
    def test_seed_axis(self, config_path, tmp_path):
        out = tmp_path / "sweep"
        code = main(
            [
                "sweep", "--config", str(config_path), "--out", str(out),
                "--axis", "seed", "--values", "0", "1",
            ]
        )
        assert code == 0
        assert (out / "seed_0" / "eval.csv").is_file()
        assert (out / "seed_1" / "eval.csv").is_file()
        lines = (out / "summary.csv").read_text().strip().split("\n")
        assert lines[0].startswith("seed,hard_distortion")
        assert len(lines) == 3

    def test_empty_values_is_config_error(self, config_path, tmp_path):
        code = main(
            [
                "sweep", "--config", str(config_path),
                "--out", str(tmp_path / "s"), "--axis", "seed",
            ]
        )
        assert code == 1


class TestDiagnoseCommand:
    def test_probe_grid_outputs(self, tmp_path):
        p = tmp_path / "d.toml"
        p.write_text(
            "[data]\nkind = 'conditional_three_gaussians'\nsigma = 0.1\n"
            "[diagnostics]\nprobe_grid = [0.5, 1.0]\nsamples_per_probe = 5000\n"
        )
        out = tmp_path / "diag"
        assert main(["diagnose", "--config", str(p), "--out", str(out)]) == 0
        lines = (out / "diagnostics.csv").read_text().strip().split("\n")
        assert lines[0] == "x,lambda_max,critical_temperature,d_max,n_samples"
        assert len(lines) == 3
        bound = json.loads((out / "global_bound.json").read_text())
        # sup over the grid is at x = 1: 2 * (2/9 + sigma^2)
        assert bound["critical_temperature_upper_bound"] == pytest.approx(
            2 * (2 / 9 + 0.01), rel=0.1
        )


class TestBenchMatchCommand:
    def test_bench_csv(self, tmp_path):
        out = tmp_path / "bench"
        code = main(
            [
                "bench-match", "--m", "3", "8", "--trials", "5",
                "--seed", "0", "--out", str(out),
            ]
        )
        assert code == 0
        lines = (out / "bench_match.csv").read_text().strip().split("\n")
        assert lines[0].startswith("m,n,trials")
        assert len(lines) == 3
        small = lines[1].split(",")
        large = lines[2].split(",")
        assert small[-1] == "1"  # exhaustive included for m = 3
        assert large[-1] == "0"  # skipped for m = 8
        # per-target min never exceeds the bijective matching loss
        assert float(small[6]) <= float(small[7]) + 1e-12
