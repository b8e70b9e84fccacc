"""Training objectives: WTA, annealed WTA, Relaxed-WTA, and the BCE scoring loss.

Every loss returns both its scalar value(s) and the upstream gradients the
network module needs (d(value)/d(hypotheses) and d(value)/d(scores)). All
functions here are pure.

The annealed loss applies a stop-gradient to the Boltzmann weights: its
hypothesis gradient is exactly 2*q_k*(f_k - y), with no Jacobian term from
the softmin itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError, ShapeError

_CLIP = 1e-12  # keeps BCE and its gradient finite for saturated sigmoids


@dataclass(frozen=True)
class BoltzmannAssignment:
    """Soft assignment of one target to the n hypotheses at temperature T.

    `z_shifted` is the partition value after subtracting the max-shift, i.e.
    sum_k exp(-(l_k - shift)/T); the true log-partition is recovered as
    log(z_shifted) - shift/T, so the free energy -T*log(Z) equals
    -T*log(z_shifted) + shift without overflow.
    """

    q: np.ndarray
    z_shifted: float
    shift: float  # min of the per-hypothesis losses
    temperature: float

    @property
    def log_partition(self) -> float:
        return float(np.log(self.z_shifted) - self.shift / self.temperature)

    @property
    def entropy(self) -> float:
        q = self.q[self.q > 0.0]
        return float(-np.sum(q * np.log(q)))


@dataclass
class LossBreakdown:
    """One sample's loss values and upstream gradients."""

    wta: float
    scoring: float
    d_hypotheses: np.ndarray  # (n, d2)
    d_scores: np.ndarray  # (n,)
    winner: int  # argmin of per-hypothesis losses, lowest index on ties
    assignment: BoltzmannAssignment | None = None

    @property
    def total(self) -> float:
        return self.wta + self.scoring


def squared_losses(hypotheses: np.ndarray, y: np.ndarray) -> np.ndarray:
    hyp = np.asarray(hypotheses, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if hyp.ndim != 2 or hyp.shape[1] != y.shape[-1]:
        raise ShapeError(f"hypotheses {hyp.shape} vs target {y.shape}")
    diff = hyp - y
    return np.sum(diff * diff, axis=1)


def softmin(losses: np.ndarray, temperature: float) -> BoltzmannAssignment:
    """Boltzmann weights q_k = exp(-l_k/T) / sum_s exp(-l_s/T), max-shifted.

    Callers wanting the T=0 hard assignment must use `wta_loss` instead.
    """
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    l = np.asarray(losses, dtype=np.float64)
    if not np.all(np.isfinite(l)):
        raise DomainError("non-finite losses")
    shift = float(np.min(l))
    w = np.exp(-(l - shift) / temperature)
    z = float(np.sum(w))
    return BoltzmannAssignment(q=w / z, z_shifted=z, shift=shift, temperature=temperature)


def _scoring_parts(losses: np.ndarray, scores: np.ndarray):
    """Hard-winner BCE scoring loss and its gradient w.r.t. the scores."""
    winner = int(np.argmin(losses))
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != losses.shape:
        raise ShapeError(f"scores {s.shape} vs losses {losses.shape}")
    target = np.zeros_like(s)
    target[winner] = 1.0
    sc = np.clip(s, _CLIP, 1.0 - _CLIP)
    value = float(-np.sum(target * np.log(sc) + (1.0 - target) * np.log(1.0 - sc)))
    d_scores = -target / sc + (1.0 - target) / (1.0 - sc)
    return winner, value, d_scores


def wta_loss(hypotheses: np.ndarray, y: np.ndarray, scores: np.ndarray) -> LossBreakdown:
    """Hard winner-takes-all: min_k ||f_k - y||^2 plus the BCE scoring loss.

    Only the winning hypothesis receives gradient; ties go to the lowest index.
    """
    hyp = np.asarray(hypotheses, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    l = squared_losses(hyp, y)
    winner, scoring, d_scores = _scoring_parts(l, scores)
    d_hyp = np.zeros_like(hyp)
    d_hyp[winner] = 2.0 * (hyp[winner] - y)
    return LossBreakdown(
        wta=float(l[winner]),
        scoring=scoring,
        d_hypotheses=d_hyp,
        d_scores=d_scores,
        winner=winner,
    )


def awta_loss(
    hypotheses: np.ndarray, y: np.ndarray, scores: np.ndarray, temperature: float
) -> LossBreakdown:
    """Annealed WTA: sum_k q_k ||f_k - y||^2 with q = softmin(losses, T).

    q is treated as a constant (stop-gradient), so the hypothesis gradient
    is exactly 2*q_k*(f_k - y). The scoring loss keeps the hard winner
    indicator even while annealing.
    """
    l = squared_losses(hypotheses, y)
    assign = softmin(l, temperature)
    winner, scoring, d_scores = _scoring_parts(l, scores)
    diff = np.asarray(hypotheses, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    d_hyp = 2.0 * assign.q[:, None] * diff
    return LossBreakdown(
        wta=float(np.dot(assign.q, l)),
        scoring=scoring,
        d_hypotheses=d_hyp,
        d_scores=d_scores,
        winner=winner,
        assignment=assign,
    )


def relaxed_wta_loss(
    hypotheses: np.ndarray, y: np.ndarray, scores: np.ndarray, epsilon: float
) -> LossBreakdown:
    """Relaxed WTA: winner weighted 1-eps, the others eps/(n-1) each.

    eps = 0 reduces exactly to `wta_loss` (same code path, bit-for-bit).
    """
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"epsilon must be in [0, 1), got {epsilon}")
    if epsilon == 0.0:
        return wta_loss(hypotheses, y, scores)
    n = np.asarray(hypotheses).shape[0]
    if n == 1:
        raise DegenerateInputError("relaxed WTA with eps > 0 needs n >= 2 hypotheses")
    l = squared_losses(hypotheses, y)
    winner, scoring, d_scores = _scoring_parts(l, scores)
    weights = np.full(n, epsilon / (n - 1))
    weights[winner] = 1.0 - epsilon
    diff = np.asarray(hypotheses, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return LossBreakdown(
        wta=float(np.dot(weights, l)),
        scoring=scoring,
        d_hypotheses=2.0 * weights[:, None] * diff,
        d_scores=d_scores,
        winner=winner,
    )


def high_temperature_gradient_limit(
    hypotheses: np.ndarray, y: np.ndarray, temperature: float
) -> np.ndarray:
    """First-order large-T term of the annealed hypothesis gradient: (2/n)(f_k - y).

    The leading term is temperature-free; `temperature` is accepted for
    signature symmetry with `awta_loss` and only validated.
    """
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    hyp = np.asarray(hypotheses, dtype=np.float64)
    return (2.0 / hyp.shape[0]) * (hyp - np.asarray(y, dtype=np.float64))


# --- batched forms used by the training loop -------------------------------
# These vectorize the per-sample definitions above; tests assert they agree
# with a per-sample loop exactly.


def batch_squared_losses(hypotheses: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """(B, n) squared distances for hypotheses (B, n, d2) and targets (B, d2)."""
    diff = hypotheses - targets[:, None, :]
    return np.einsum("bnd,bnd->bn", diff, diff)


def batch_hard_weights(sq: np.ndarray) -> np.ndarray:
    """One-hot winner weights per row (lowest index on ties)."""
    w = np.zeros_like(sq)
    w[np.arange(sq.shape[0]), np.argmin(sq, axis=1)] = 1.0
    return w


def batch_softmin_weights(sq: np.ndarray, temperature: float) -> np.ndarray:
    if temperature <= 0.0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    shifted = -(sq - np.min(sq, axis=1, keepdims=True)) / temperature
    w = np.exp(shifted)
    return w / np.sum(w, axis=1, keepdims=True)


def batch_relaxed_weights(sq: np.ndarray, epsilon: float) -> np.ndarray:
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"epsilon must be in [0, 1), got {epsilon}")
    if epsilon == 0.0:
        return batch_hard_weights(sq)
    n = sq.shape[1]
    if n == 1:
        raise DegenerateInputError("relaxed WTA with eps > 0 needs n >= 2 hypotheses")
    w = np.full_like(sq, epsilon / (n - 1))
    w[np.arange(sq.shape[0]), np.argmin(sq, axis=1)] = 1.0 - epsilon
    return w


def batch_scoring(sq: np.ndarray, scores: np.ndarray):
    """Summed hard-winner BCE over a batch; returns (value, d_scores)."""
    winners = np.argmin(sq, axis=1)
    target = np.zeros_like(scores)
    target[np.arange(sq.shape[0]), winners] = 1.0
    sc = np.clip(scores, _CLIP, 1.0 - _CLIP)
    value = float(-np.sum(target * np.log(sc) + (1.0 - target) * np.log(1.0 - sc)))
    d_scores = -target / sc + (1.0 - target) / (1.0 - sc)
    return value, d_scores
