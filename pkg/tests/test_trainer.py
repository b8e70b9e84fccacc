import numpy as np
import pytest

from amcl.data import Dataset, SyntheticSpec
from amcl.errors import ConfigError
from amcl.metrics import lloyd_oracle
from amcl.numerics import make_rng
from amcl.schedulers import ScheduleSpec
from amcl.trainer import TrainConfig, evaluate, train


def small_config(**overrides):
    base = dict(
        method="mcl",
        n_hypotheses=2,
        epochs=8,
        seed=0,
        batch_size=256,
        learning_rate=0.05,
        eval_every=2,
        dataset=SyntheticSpec("two_point"),
        pool_size=2048,
        validation_size=512,
        hidden=(16,),
        head_activation="tanh",
    )
    base.update(overrides)
    return TrainConfig(**base)


class TestConfigValidation:
    def test_unknown_method(self):
        with pytest.raises(ConfigError):
            small_config(method="wta2")

    def test_amcl_requires_schedule(self):
        with pytest.raises(ConfigError):
            small_config(method="amcl")

    def test_relaxed_epsilon_range(self):
        with pytest.raises(ConfigError):
            small_config(method="relaxed", epsilon=1.0)

    def test_needs_some_dataset(self):
        with pytest.raises(ConfigError):
            train(small_config(dataset=None))


class TestDeterminism:
    def test_same_seed_identical_runs(self):
        cfg = small_config(epochs=3)
        bank_a, points_a = train(cfg)
        bank_b, points_b = train(cfg)
        for key in bank_a.params:
            assert np.array_equal(bank_a.params[key], bank_b.params[key])
        assert [p.hard_distortion for p in points_a] == [p.hard_distortion for p in points_b]

    def test_different_seeds_differ(self):
        bank_a, _ = train(small_config(epochs=2, seed=0))
        bank_b, _ = train(small_config(epochs=2, seed=1))
        assert not np.array_equal(bank_a.params["Wh"], bank_b.params["Wh"])


class TestReductionIdentities:
    def test_amcl_at_zero_temperature_is_mcl(self):
        """A schedule that is already past its floor must replicate plain
        winner-take-all training bit for bit."""
        mcl_bank, _ = train(small_config(epochs=3))
        frozen = ScheduleSpec("constant", t0=0.0)
        amcl_bank, _ = train(small_config(epochs=3, method="amcl", schedule=frozen))
        for key in mcl_bank.params:
            assert np.array_equal(mcl_bank.params[key], amcl_bank.params[key])

    def test_relaxed_at_zero_epsilon_is_mcl(self):
        mcl_bank, _ = train(small_config(epochs=3))
        rel_bank, _ = train(small_config(epochs=3, method="relaxed", epsilon=0.0))
        for key in mcl_bank.params:
            assert np.array_equal(mcl_bank.params[key], rel_bank.params[key])


class TestTraining:
    def test_two_point_mcl_learns_codebook(self):
        cfg = small_config(epochs=40, learning_rate=0.1)
        bank, points = train(cfg)
        hyp, _, _ = bank.forward(np.ones((1, 1)))
        assert np.allclose(np.sort(hyp[0].ravel()), [-1.0, 1.0], atol=0.05)
        assert points[-1].hard_distortion < 0.01

    def test_amcl_single_gaussian_reaches_lloyd(self):
        """Annealed training on a 1-D Gaussian should land near the optimal
        2-level quantizer once the schedule hits the hard floor."""
        spec = SyntheticSpec("single_gaussian_1d", sigma=0.2)
        cfg = small_config(
            method="amcl",
            dataset=spec,
            epochs=60,
            learning_rate=0.1,
            pool_size=4096,
            schedule=ScheduleSpec("exponential", t0=0.1, rho=0.9, floor=5e-4),
        )
        bank, points = train(cfg)
        assert points[-1].hard_wta
        samples = 0.2 * make_rng(99).standard_normal(100000)
        _, lloyd_distortion = lloyd_oracle(samples, 2)
        assert points[-1].hard_distortion < 2.0 * lloyd_distortion

    def test_trajectory_epochs_and_temperatures(self):
        cfg = small_config(
            method="amcl",
            epochs=7,
            eval_every=3,
            schedule=ScheduleSpec("linear", t0=1.0, t_max=100),
        )
        _, points = train(cfg)
        assert [p.epoch for p in points] == [0, 3, 6]
        temps = [p.temperature for p in points]
        assert all(b < a for a, b in zip(temps, temps[1:]))

    def test_explicit_dataset_training(self, rng):
        y = np.where(rng.random(600) < 0.5, -1.0, 1.0)[:, None]
        data = Dataset(np.ones((600, 1)), y)
        cfg = small_config(epochs=30, learning_rate=0.1, dataset=None)
        bank, points = train(cfg, train_data=data)
        assert points[-1].hard_distortion < 0.05


class TestEvaluate:
    def test_report_fields(self):
        bank, _ = train(small_config(epochs=2))
        ds = Dataset(np.ones((10, 1)), np.linspace(-1, 1, 10)[:, None])
        report = evaluate(bank, ds, temperature=0.5)
        assert report.n_samples == 10
        assert report.temperature == 0.5
        assert report.soft_distortion >= report.hard_distortion - 1e-12
        assert abs(
            report.free_energy - (report.soft_distortion - 0.5 * report.entropy)
        ) < 1e-10

    def test_hard_report_when_no_temperature(self):
        bank, _ = train(small_config(epochs=2))
        ds = Dataset(np.ones((10, 1)), np.linspace(-1, 1, 10)[:, None])
        report = evaluate(bank, ds)
        assert report.temperature == 0.0
        assert report.soft_distortion == report.hard_distortion
        assert report.entropy == 0.0
