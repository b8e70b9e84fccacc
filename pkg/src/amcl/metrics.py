"""Evaluation quantities: distortions, RMSE, free energy, entropy, rate, SLB.

Entropies are internal in nats; the empirical rate is reported in bits.
Everything here is read-only over (bank, dataset) and batched internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, destandardize_prediction
from .errors import DegenerateInputError, DomainError
from .losses import batch_softmin_weights, batch_squared_losses

_EVAL_BATCH = 8192


@dataclass
class EvalReport:
    hard_distortion: float
    soft_distortion: float
    rmse: float
    entropy: float  # mean assignment entropy, nats
    free_energy: float
    rate_bits: float
    n_samples: int
    temperature: float


def _batched_sq(bank, dataset: Dataset, original_scale: bool = False):
    """Yield (sq_losses (B, n), hypotheses (B, n, d2), targets (B, d2)) chunks."""
    for start in range(0, len(dataset), _EVAL_BATCH):
        x = dataset.inputs[start : start + _EVAL_BATCH]
        y = dataset.targets[start : start + _EVAL_BATCH]
        hyp, scores, _ = bank.forward(x)
        if original_scale and dataset.standardization is not None:
            rec = dataset.standardization
            hyp = destandardize_prediction(hyp, rec)
            y = destandardize_prediction(y, rec)
        yield batch_squared_losses(hyp, y), hyp, scores, y


def hard_distortion(bank, dataset: Dataset, original_scale: bool = False) -> float:
    """Mean over samples of min_k ||f_k(x) - y||^2."""
    total, count = 0.0, 0
    for sq, _, _, _ in _batched_sq(bank, dataset, original_scale):
        total += float(np.sum(np.min(sq, axis=1)))
        count += sq.shape[0]
    return total / count


def soft_distortion(
    bank, dataset: Dataset, temperature: float, original_scale: bool = False
) -> float:
    """Mean over samples of sum_k q_T,k ||f_k(x) - y||^2."""
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    total, count = 0.0, 0
    for sq, _, _, _ in _batched_sq(bank, dataset, original_scale):
        q = batch_softmin_weights(sq, temperature)
        total += float(np.sum(q * sq))
        count += sq.shape[0]
    return total / count


def free_energy(bank, dataset: Dataset, temperature: float) -> float:
    """-T * mean_y log sum_k exp(-||f_k - y||^2 / T), with max-shift.

    Identity: free_energy == soft_distortion - T * mean_entropy, exactly up
    to rounding.
    """
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    total, count = 0.0, 0
    for sq, _, _, _ in _batched_sq(bank, dataset):
        shift = np.min(sq, axis=1)
        logz = np.log(np.sum(np.exp(-(sq - shift[:, None]) / temperature), axis=1))
        total += float(np.sum(-temperature * logz + shift))
        count += sq.shape[0]
    return total / count


def mean_assignment_entropy(bank, dataset: Dataset, temperature: float) -> float:
    """Mean entropy (nats) of the per-sample Boltzmann assignment."""
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    total, count = 0.0, 0
    for sq, _, _, _ in _batched_sq(bank, dataset):
        q = batch_softmin_weights(sq, temperature)
        total += float(np.sum(_entropy_rows(q)))
        count += sq.shape[0]
    return total / count


def _entropy_rows(q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0.0, q * np.log(q), 0.0)
    return -np.sum(terms, axis=1)


def rmse(bank, dataset: Dataset, original_scale: bool = False) -> float:
    """Root mean squared error of the score-weighted mean prediction.

    Scores are renormalized to sum to 1 per sample before mixing: the
    sigmoid heads are trained independently and need not form a simplex.
    """
    total, count = 0.0, 0
    for _, hyp, scores, y in _batched_sq(bank, dataset, original_scale):
        mass = np.sum(scores, axis=1)
        if np.any(mass < 1e-12):
            raise DegenerateInputError("all scores vanish for some sample")
        weights = scores / mass[:, None]
        pred = np.einsum("bn,bnd->bd", weights, hyp)
        total += float(np.sum(np.sum((pred - y) ** 2, axis=1)))
        count += hyp.shape[0]
    return float(np.sqrt(total / count))


def empirical_rate(bank, dataset: Dataset, temperature: float) -> float:
    """Mutual information (bits) between targets and hypothesis index.

    I = H(mean_y q(.|y)) - mean_y H(q(.|y)), with q the per-sample Boltzmann
    vector; clamped to [0, log2 n].
    """
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    q_sum = None
    cond_entropy, count = 0.0, 0
    for sq, _, _, _ in _batched_sq(bank, dataset):
        q = batch_softmin_weights(sq, temperature)
        q_sum = q.sum(axis=0) if q_sum is None else q_sum + q.sum(axis=0)
        cond_entropy += float(np.sum(_entropy_rows(q)))
        count += sq.shape[0]
    marginal = q_sum / count
    h_marginal = float(_entropy_rows(marginal[None, :])[0])
    rate_nats = h_marginal - cond_entropy / count
    n = len(marginal)
    return float(np.clip(rate_nats / np.log(2.0), 0.0, np.log2(n)))


def shannon_lower_bound(sigma2: float, distortion: float) -> float:
    """Scalar-Gaussian Shannon Lower Bound, in bits: max(0, 0.5*log2(sigma2/D)).

    Gaussian-specialized: both the source entropy and the distortion-ball
    entropy are taken Gaussian, so the bound is H(Y) - H(D) in closed form.
    """
    if sigma2 <= 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    if distortion <= 0.0:
        raise DomainError(f"distortion must be > 0, got {distortion}")
    return max(0.0, 0.5 * np.log2(sigma2 / distortion))


def lloyd_oracle(samples, n: int, max_iterations: int = 500):
    """Classic Lloyd quantizer; the T -> 0 oracle for optimal codebooks.

    Alternates nearest-codeword assignment and hard barycenter updates until
    codebook movement < 1e-9 or the iteration cap. 1-D samples use the
    deterministic n-quantile init; multi-dimensional samples use a seeded
    greedy farthest-point init. Returns (codebook (n, d), distortion).
    """
    pts = np.asarray(samples, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(np.unique(pts, axis=0)) < n:
        raise DegenerateInputError(f"need at least {n} distinct samples")
    d = pts.shape[1]
    if d == 1:
        qs = (np.arange(n) + 0.5) / n
        codebook = np.quantile(pts[:, 0], qs)[:, None]
    else:
        codebook = _farthest_point_init(pts, n)
    for _ in range(max_iterations):
        dist = np.sum((pts[:, None, :] - codebook[None, :, :]) ** 2, axis=2)
        assign = np.argmin(dist, axis=1)
        new_codebook = codebook.copy()
        for k in range(n):
            members = pts[assign == k]
            if len(members):
                new_codebook[k] = members.mean(axis=0)
        move = float(np.max(np.abs(new_codebook - codebook)))
        codebook = new_codebook
        if move < 1e-9:
            break
    dist = np.sum((pts[:, None, :] - codebook[None, :, :]) ** 2, axis=2)
    return codebook, float(np.mean(np.min(dist, axis=1)))


def _farthest_point_init(pts: np.ndarray, n: int) -> np.ndarray:
    """Deterministic k-means++-style seeding: start at the barycenter's
    nearest point, then greedily take the farthest point from the chosen set."""
    chosen = [int(np.argmin(np.sum((pts - pts.mean(axis=0)) ** 2, axis=1)))]
    d2 = np.sum((pts - pts[chosen[0]]) ** 2, axis=1)
    for _ in range(n - 1):
        nxt = int(np.argmax(d2))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((pts - pts[nxt]) ** 2, axis=1))
    return pts[chosen].copy()
