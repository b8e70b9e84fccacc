"""Training loop for MCL / Relaxed-WTA / annealed-epsilon / annealed MCL.

One loop per (config, seed), single-threaded for determinism. The Boltzmann
normalization is always per (x, y) sample, never per batch, and the scoring
loss always targets the hard winner recomputed from the current hypothesis
positions. Compound objective: WTA (or annealed/relaxed) term + scoring
term, both flowing into the shared backbone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import losses, metrics
from .data import Dataset, SyntheticSpec, sample_synthetic
from .diagnostics import TrajectoryRecorder, TrajectoryPoint, _hard_rate_bits
from .errors import ConfigError, NumericError
from .network import BankConfig, HypothesisBank, OptimizerState, step
from .numerics import make_rng
from .schedulers import ScheduleSpec, epsilon_at, temperature_at

METHODS = ("mcl", "relaxed", "relaxed_annealed", "amcl")


@dataclass
class TrainConfig:
    method: str
    n_hypotheses: int
    epochs: int
    seed: int = 0
    batch_size: int = 1024
    optimizer: str = "sgd"
    learning_rate: float = 0.01
    eval_every: int = 5
    schedule: ScheduleSpec | None = None
    epsilon: float = 0.1  # relaxed
    epsilon0: float = 0.5  # relaxed_annealed, annealed linearly over the run
    dataset: SyntheticSpec | None = None
    pool_size: int = 100_000  # fresh synthetic samples per epoch
    validation_size: int = 25_000
    hidden: tuple[int, ...] = (256, 256)
    head_activation: str = "tanh"
    cluster_radius: float = 0.01

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.epochs < 1 or self.n_hypotheses < 1:
            raise ConfigError("epochs and n_hypotheses must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.method == "amcl" and self.schedule is None:
            raise ConfigError("method 'amcl' requires a temperature schedule")
        if self.method == "relaxed" and not 0.0 <= self.epsilon < 1.0:
            raise ConfigError("method 'relaxed' requires epsilon in [0, 1)")
        self.hidden = tuple(self.hidden)


def _batch_weights(config: TrainConfig, sq: np.ndarray, epoch: int):
    """Per-sample assignment weights for the epoch's method/temperature.

    Returns (weights (B, n), temperature, hard_wta flag).
    """
    if config.method == "amcl":
        t, hard = temperature_at(config.schedule, epoch)
        if hard:
            return losses.batch_hard_weights(sq), 0.0, True
        return losses.batch_softmin_weights(sq, t), t, False
    if config.method == "relaxed":
        return losses.batch_relaxed_weights(sq, config.epsilon), 0.0, True
    if config.method == "relaxed_annealed":
        eps = epsilon_at(config.epsilon0, epoch, config.epochs)
        return losses.batch_relaxed_weights(sq, eps), 0.0, True
    return losses.batch_hard_weights(sq), 0.0, True


def train(
    config: TrainConfig,
    train_data: Dataset | None = None,
    validation: Dataset | None = None,
) -> tuple[HypothesisBank, list[TrajectoryPoint]]:
    """Run one training loop; returns the trained bank and its trajectory.

    Synthetic configs resample a fresh pool of `pool_size` points each epoch;
    an explicit `train_data` dataset is instead reshuffled each epoch.
    Deterministic given (config, seed).
    """
    if train_data is None and config.dataset is None:
        raise ConfigError("either config.dataset or train_data must be given")
    data_rng = make_rng(config.seed + 1_000_003)
    if train_data is not None:
        input_dim = train_data.inputs.shape[1]
        output_dim = train_data.targets.shape[1]
        if validation is None:
            validation = train_data
        probe = validation.inputs[0]
    else:
        pool = sample_synthetic(config.dataset, 2, data_rng)
        input_dim = pool.inputs.shape[1]
        output_dim = pool.targets.shape[1]
        if validation is None:
            validation = sample_synthetic(config.dataset, config.validation_size, data_rng)
        probe = np.ones(input_dim)
    bank = HypothesisBank(
        BankConfig(
            input_dim=input_dim,
            output_dim=output_dim,
            n_hypotheses=config.n_hypotheses,
            hidden=config.hidden,
            head_activation=config.head_activation,
        ),
        seed=config.seed,
    )
    opt = OptimizerState(kind=config.optimizer, learning_rate=config.learning_rate)
    recorder = TrajectoryRecorder(validation, probe, cluster_radius=config.cluster_radius)
    for epoch in range(config.epochs):
        if train_data is not None:
            order = data_rng.permutation(len(train_data))
            inputs = train_data.inputs[order]
            targets = train_data.targets[order]
        else:
            pool = sample_synthetic(config.dataset, config.pool_size, data_rng)
            inputs, targets = pool.inputs, pool.targets
        temperature, hard = _run_epoch(config, bank, opt, inputs, targets, epoch)
        if epoch % config.eval_every == 0 or epoch == config.epochs - 1:
            recorder.observe(epoch, bank, temperature, hard)
    return bank, recorder.points


def _run_epoch(config, bank, opt, inputs, targets, epoch):
    temperature, hard = 0.0, True
    for start in range(0, len(inputs), config.batch_size):
        x = inputs[start : start + config.batch_size]
        y = targets[start : start + config.batch_size]
        b = len(x)
        hyp, scores, tape = bank.forward(x)
        sq = losses.batch_squared_losses(hyp, y)
        weights, temperature, hard = _batch_weights(config, sq, epoch)
        wta_value = float(np.sum(weights * sq)) / b
        scoring_value, d_scores = losses.batch_scoring(sq, scores)
        scoring_value /= b
        if not np.isfinite(wta_value + scoring_value):
            raise NumericError(
                f"non-finite loss at epoch {epoch}, batch offset {start}"
            )
        d_hyp = (2.0 / b) * weights[:, :, None] * (hyp - y[:, None, :])
        grads = bank.backward(tape, d_hyp, d_scores / b)
        step(bank, opt, grads)
    return temperature, hard


def evaluate(
    bank: HypothesisBank, dataset: Dataset, temperature: float | None = None
) -> metrics.EvalReport:
    """Full evaluation report; hard-assignment quantities when T is absent.

    Distortion and RMSE are reported in original scale when the dataset
    carries a standardization record; the temperature-dependent quantities
    stay in the (standardized) training scale where the Boltzmann weights
    are defined.
    """
    original = dataset.standardization is not None
    hard = metrics.hard_distortion(bank, dataset, original_scale=original)
    error = metrics.rmse(bank, dataset, original_scale=original)
    if temperature is not None and temperature > 0.0:
        soft = metrics.soft_distortion(bank, dataset, temperature)
        fe = metrics.free_energy(bank, dataset, temperature)
        entropy = metrics.mean_assignment_entropy(bank, dataset, temperature)
        rate = metrics.empirical_rate(bank, dataset, temperature)
        t_out = temperature
    else:
        soft = metrics.hard_distortion(bank, dataset)
        fe, entropy = soft, 0.0
        rate = _hard_rate_bits(bank, dataset)
        t_out = 0.0
    return metrics.EvalReport(
        hard_distortion=hard,
        soft_distortion=soft,
        rmse=error,
        entropy=entropy,
        free_energy=fe,
        rate_bits=rate,
        n_samples=len(dataset),
        temperature=t_out,
    )
