"""Dense linear-algebra primitives and seeded RNG.

Everything runs in float64: the free-energy identity checks downstream
require ~1e-10 agreement, which 32-bit floats cannot deliver.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DegenerateInputError, ShapeError

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_CAP = 10_000


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator; equal seeds and call sequences give identical streams."""
    return np.random.default_rng(seed)


def spawn_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for sub-stream `stream` of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(stream + 1)[stream])


def sample_covariance(points) -> np.ndarray:
    """Biased (1/N) sample covariance of a set of d-vectors.

    The 1/N normalizer matches the population covariance appearing in the
    critical-temperature formula, not the unbiased 1/(N-1) estimator.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ShapeError(f"expected a sequence of vectors, got ndim={pts.ndim}")
    n, _ = pts.shape
    if n < 2:
        raise DegenerateInputError(f"need at least 2 points, got {n}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInputError("non-finite entries in covariance input")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / n
    return (cov + cov.T) / 2.0


def lambda_max(m: np.ndarray) -> float:
    """Dominant eigenvalue of a symmetric matrix by shifted power iteration.

    Only the top eigenvalue is needed (for critical temperatures), so no
    full decomposition is done here; tests cross-check against a dense
    eigensolver. The matrix is shifted to be PSD first so the iteration
    tracks the algebraically largest eigenvalue even with negative spectrum.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ShapeError("non-finite entries")
    asym = np.max(np.abs(m - m.T)) if m.size else 0.0
    if asym > 1e-9:
        raise ShapeError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    d = m.shape[0]
    if d == 1:
        return float(m[0, 0])
    # Gershgorin-style shift: m + c*I has nonnegative spectrum.
    shift = float(np.max(np.sum(np.abs(m), axis=1)))
    if shift == 0.0:
        return 0.0
    b = m + shift * np.eye(d)
    v = np.ones(d) + 1e-8 * np.arange(d)  # break symmetry with any eigenvector
    v /= np.linalg.norm(v)
    rq_prev = np.inf
    for _ in range(POWER_ITERATION_CAP):
        w = b @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return -shift
        v = w / norm
        rq = float(v @ (b @ v))
        if abs(rq - rq_prev) < POWER_ITERATION_TOL * max(1.0, abs(rq)):
            return rq - shift
        rq_prev = rq
    raise ConvergenceError(
        f"power iteration did not converge within {POWER_ITERATION_CAP} iterations",
        last_iterate=v,
    )
