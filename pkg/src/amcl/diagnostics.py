"""Theory-verification tools: critical temperatures, cluster counting,
and trajectory recording.

The first critical temperature of the annealed dynamics at input x is
2 * lambda_max(C(x)), where C(x) is the conditional covariance of the
targets; the optimal single-hypothesis distortion is trace(C(x)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .data import Dataset
from .errors import DegenerateInputError, DomainError
from .losses import batch_hard_weights, batch_squared_losses
from .numerics import lambda_max, sample_covariance

TRAJECTORY_HEADER = (
    "epoch,temperature,hard_distortion,soft_distortion,free_energy,"
    "entropy,rate_bits,cluster_count,hard_wta"
)

DEFAULT_CLUSTER_RADIUS = 0.01  # in tanh-normalized output space

FREE_ENERGY_IDENTITY_TOL = 1e-10


@dataclass
class DiagnosticsReport:
    covariance: np.ndarray
    lambda_max: float
    critical_temperature: float  # 2 * lambda_max
    d_max: float  # trace of the covariance = optimal 1-hypothesis distortion
    n_samples: int


@dataclass
class TrajectoryPoint:
    epoch: int
    temperature: float
    hard_distortion: float
    soft_distortion: float
    free_energy: float
    entropy: float
    rate_bits: float
    cluster_count: int
    hard_wta: bool

    def csv_row(self) -> str:
        return (
            f"{self.epoch},{self.temperature!r},{self.hard_distortion!r},"
            f"{self.soft_distortion!r},{self.free_energy!r},{self.entropy!r},"
            f"{self.rate_bits!r},{self.cluster_count},{int(self.hard_wta)}"
        )


def critical_temperature(target_samples) -> DiagnosticsReport:
    """Covariance, top eigenvalue, critical temperature and D_max at fixed x."""
    pts = np.asarray(target_samples, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) < 2:
        raise DegenerateInputError("need at least 2 target samples")
    cov = sample_covariance(pts)
    lam = lambda_max(cov)
    return DiagnosticsReport(
        covariance=cov,
        lambda_max=lam,
        critical_temperature=2.0 * lam,
        d_max=float(np.trace(cov)),
        n_samples=len(pts),
    )


def count_clusters(points: np.ndarray, radius: float) -> int:
    """Connected components of the graph linking points at distance <= radius.

    Union-find over all pairs; deterministic.
    """
    if radius <= 0.0:
        raise DomainError(f"radius must be > 0, got {radius}")
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    r2 = radius * radius
    for i in range(n):
        for j in range(i + 1, n):
            if d2[i, j] <= r2:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(i) for i in range(n)})


class TrajectoryRecorder:
    """Collects one TrajectoryPoint per evaluation during training.

    Clusters are counted on the hypotheses produced at `probe_input`. The
    free-energy identity F = D_soft - T*H is asserted at every point with
    positive temperature.
    """

    def __init__(
        self,
        validation: Dataset,
        probe_input: np.ndarray,
        cluster_radius: float = DEFAULT_CLUSTER_RADIUS,
    ):
        self.validation = validation
        self.probe_input = np.asarray(probe_input, dtype=np.float64)
        self.cluster_radius = cluster_radius
        self.points: list[TrajectoryPoint] = []

    def observe(self, epoch: int, bank, temperature: float, hard_wta: bool) -> TrajectoryPoint:
        hard = metrics.hard_distortion(bank, self.validation)
        if hard_wta or temperature <= 0.0:
            # Hard assignment: q is one-hot, so soft metrics collapse onto
            # the hard ones and the rate is that of the winner channel.
            soft = hard
            fe = hard
            entropy = 0.0
            rate = _hard_rate_bits(bank, self.validation)
        else:
            soft = metrics.soft_distortion(bank, self.validation, temperature)
            fe = metrics.free_energy(bank, self.validation, temperature)
            entropy = metrics.mean_assignment_entropy(bank, self.validation, temperature)
            rate = metrics.empirical_rate(bank, self.validation, temperature)
            gap = abs(fe - (soft - temperature * entropy))
            # absolute at moderate temperatures, relative once T*H dwarfs
            # the distortion and the subtraction loses absolute precision
            scale = max(1.0, abs(soft), temperature * entropy)
            if gap > FREE_ENERGY_IDENTITY_TOL * scale:
                raise AssertionError(
                    f"free-energy identity violated at epoch {epoch}: gap {gap:.3e}"
                )
        hyp, _, _ = bank.forward(self.probe_input)
        point = TrajectoryPoint(
            epoch=epoch,
            temperature=temperature,
            hard_distortion=hard,
            soft_distortion=soft,
            free_energy=fe,
            entropy=entropy,
            rate_bits=rate,
            cluster_count=count_clusters(hyp[0], self.cluster_radius),
            hard_wta=hard_wta,
        )
        self.points.append(point)
        return point

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(TRAJECTORY_HEADER + "\n")
            for p in self.points:
                f.write(p.csv_row() + "\n")


def _hard_rate_bits(bank, dataset: Dataset) -> float:
    """Rate of the deterministic winner assignment: H(winner marginal) in bits."""
    counts = None
    total = 0
    for start in range(0, len(dataset), 8192):
        x = dataset.inputs[start : start + 8192]
        y = dataset.targets[start : start + 8192]
        hyp, _, _ = bank.forward(x)
        w = batch_hard_weights(batch_squared_losses(hyp, y))
        counts = w.sum(axis=0) if counts is None else counts + w.sum(axis=0)
        total += len(x)
    p = counts / total
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def detect_split_temperature(points) -> float | None:
    """Highest temperature at which the fused hypotheses split again.

    The trajectory is read in chronological order (temperature decreasing
    over training): points before the first fusion (cluster count 1) are
    ignored, since a freshly initialized bank is spread out for reasons
    unrelated to phase transitions. Returns the temperature of the first
    post-fusion point with more than one cluster, or None.
    """
    fused = False
    for p in points:
        if not fused:
            fused = p.cluster_count == 1
        elif p.cluster_count > 1:
            return p.temperature
    return None
