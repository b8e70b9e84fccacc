"""Synthetic conditional datasets, CSV ingestion, and the UCI fold protocol."""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateInputError, ShapeError

# Component means of the three-Gaussian mixture used throughout the
# synthetic experiments.
THREE_GAUSSIAN_MEANS = np.array([[-0.5, -0.5], [0.0, 0.5], [0.5, -0.5]])

SYNTHETIC_KINDS = (
    "three_gaussians",
    "conditional_three_gaussians",
    "single_gaussian_1d",
    "two_point",
)


@dataclass(frozen=True)
class Standardization:
    """Per-column train means/stds for inputs and targets.

    Zero-variance columns get std clamped to 1 and are flagged.
    """

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray
    degenerate_x: tuple = ()
    degenerate_y: tuple = ()


@dataclass
class Dataset:
    inputs: np.ndarray  # (N, d1)
    targets: np.ndarray  # (N, d2)
    standardization: Standardization | None = None

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.targets.ndim != 2:
            raise ShapeError("inputs and targets must be 2-D arrays")
        if len(self.inputs) != len(self.targets):
            raise ShapeError("inputs and targets disagree on sample count")
        if len(self.inputs) < 1:
            raise DegenerateInputError("empty dataset")

    def __len__(self):
        return len(self.inputs)


@dataclass(frozen=True)
class SyntheticSpec:
    kind: str
    sigma: float = 0.1
    means: np.ndarray = field(default_factory=lambda: THREE_GAUSSIAN_MEANS.copy())

    def __post_init__(self):
        if self.kind not in SYNTHETIC_KINDS:
            raise ConfigError(f"unknown synthetic kind {self.kind!r}")
        if self.sigma <= 0.0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")


def sample_synthetic(spec: SyntheticSpec, n: int, rng: np.random.Generator) -> Dataset:
    """Draw n samples from a synthetic specification.

    three_gaussians feeds the constant input x = 1 (the target mixture does
    not depend on x); the conditional variant draws x ~ U[0,1] and scales
    the component means by x. single_gaussian_1d and two_point are small
    test fixtures.
    """
    if n < 1:
        raise ConfigError("need n >= 1 samples")
    if spec.kind == "three_gaussians":
        x = np.ones((n, 1))
        comp = rng.integers(0, 3, size=n)
        y = spec.means[comp] + spec.sigma * rng.standard_normal((n, 2))
    elif spec.kind == "conditional_three_gaussians":
        x = rng.uniform(0.0, 1.0, size=(n, 1))
        comp = rng.integers(0, 3, size=n)
        y = x * spec.means[comp] + spec.sigma * rng.standard_normal((n, 2))
    elif spec.kind == "single_gaussian_1d":
        x = np.ones((n, 1))
        y = spec.sigma * rng.standard_normal((n, 1))
    else:  # two_point
        x = np.ones((n, 1))
        y = np.where(np.arange(n) % 2 == 0, -1.0, 1.0)[:, None]
    return Dataset(inputs=x, targets=y)


def sample_conditional_targets(
    spec: SyntheticSpec, x: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Samples of y | x for a synthetic spec, used by the diagnostics probes."""
    if spec.kind == "conditional_three_gaussians":
        comp = rng.integers(0, 3, size=n)
        return x * spec.means[comp] + spec.sigma * rng.standard_normal((n, 2))
    if spec.kind == "three_gaussians":
        comp = rng.integers(0, 3, size=n)
        return spec.means[comp] + spec.sigma * rng.standard_normal((n, 2))
    if spec.kind == "single_gaussian_1d":
        return spec.sigma * rng.standard_normal((n, 1))
    return np.where(np.arange(n) % 2 == 0, -1.0, 1.0)[:, None]


# --- standardization -------------------------------------------------------


def _column_stats(a: np.ndarray):
    mean = a.mean(axis=0)
    std = a.std(axis=0)
    degenerate = tuple(int(i) for i in np.nonzero(std <= 0.0)[0])
    std = np.where(std <= 0.0, 1.0, std)
    return mean, std, degenerate


def fit_standardization(train_inputs: np.ndarray, train_targets: np.ndarray) -> Standardization:
    x_mean, x_std, deg_x = _column_stats(train_inputs)
    y_mean, y_std, deg_y = _column_stats(train_targets)
    return Standardization(x_mean, x_std, y_mean, y_std, deg_x, deg_y)


def standardize(ds_inputs, ds_targets, record: Standardization):
    return (
        (ds_inputs - record.x_mean) / record.x_std,
        (ds_targets - record.y_mean) / record.y_std,
    )


def destandardize_prediction(pred: np.ndarray, record: Standardization) -> np.ndarray:
    """Map a standardized prediction back to the original target scale."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape[-1] != record.y_mean.shape[0]:
        raise ShapeError(
            f"prediction dim {pred.shape[-1]} vs record dim {record.y_mean.shape[0]}"
        )
    return record.y_mean + record.y_std * pred


# --- CSV ingestion ---------------------------------------------------------


@dataclass(frozen=True)
class FoldSpec:
    """Deterministic 90/10 split keyed by (dataset name, fold index)."""

    name: str
    fold: int
    n_folds: int = 20
    test_fraction: float = 0.1


def _fold_seed(spec: FoldSpec) -> int:
    return zlib.crc32(f"{spec.name}:{spec.fold}".encode())


def read_csv_matrix(path):
    """Parse a headed CSV into (header, (N, C) float matrix).

    Missing or non-numeric cells are reported with their row indices.
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DegenerateInputError(f"{path}: empty file") from None
        rows, bad_rows = [], []
        for i, row in enumerate(reader):
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                bad_rows.append(i)
                continue
            if len(values) != len(header) or any(not np.isfinite(v) for v in values):
                bad_rows.append(i)
                continue
            rows.append(values)
    if bad_rows:
        raise DegenerateInputError(
            f"{path}: {len(bad_rows)} malformed rows (indices {bad_rows[:10]}...)"
        )
    if not rows:
        raise DegenerateInputError(f"{path}: no data rows")
    return header, np.array(rows, dtype=np.float64)


def load_csv(path, target_columns, fold_spec: FoldSpec):
    """Load a CSV, split train/test by fold, standardize on train statistics.

    Returns (train, test) Datasets holding standardized values; the shared
    standardization record allows mapping predictions back to original scale.
    """
    header, matrix = read_csv_matrix(path)
    index = {name: i for i, name in enumerate(header)}
    try:
        target_idx = [index[c] for c in target_columns]
    except KeyError as e:
        raise ConfigError(f"target column {e.args[0]!r} not in header {header}") from None
    input_idx = [i for i in range(len(header)) if i not in target_idx]
    n = matrix.shape[0]
    order = np.random.default_rng(_fold_seed(fold_spec)).permutation(n)
    n_test = max(1, int(round(n * fold_spec.test_fraction)))
    start = (fold_spec.fold * n_test) % n
    test_rows = order[start : start + n_test]
    train_rows = np.setdiff1d(order, test_rows)
    if len(train_rows) == 0:
        raise DegenerateInputError("empty train fold")
    record = fit_standardization(
        matrix[np.ix_(train_rows, input_idx)], matrix[np.ix_(train_rows, target_idx)]
    )
    train_x, train_y = standardize(
        matrix[np.ix_(train_rows, input_idx)], matrix[np.ix_(train_rows, target_idx)], record
    )
    test_x, test_y = standardize(
        matrix[np.ix_(test_rows, input_idx)], matrix[np.ix_(test_rows, target_idx)], record
    )
    return (
        Dataset(train_x, train_y, standardization=record),
        Dataset(test_x, test_y, standardization=record),
    )
