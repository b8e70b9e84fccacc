"""Temperature and epsilon schedules over training epochs.

Temperature is constant within an epoch; the schedule is queried once per
epoch. When the raw schedule value drops below the configured floor the
schedule reports exactly 0 together with a hard-WTA flag, and training
switches back to the vanilla winner-takes-all update.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

KINDS = ("constant", "linear", "exponential", "chunk_linear")

# Floor below which exponential cooling hands over to hard WTA.
DEFAULT_EXPONENTIAL_FLOOR = 5e-4


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str
    t0: float
    rho: float = 0.95  # exponential decay factor per epoch
    t_max: int = 1000  # cutoff epoch for (chunk-)linear schedules
    floor: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        if self.t0 < 0.0:
            raise ConfigError(f"t0 must be >= 0, got {self.t0}")
        if self.kind == "exponential" and not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must be in (0, 1), got {self.rho}")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1, got {self.t_max}")
        if self.floor < 0.0:
            raise ConfigError(f"floor must be >= 0, got {self.floor}")


def temperature_at(spec: ScheduleSpec, t: int) -> tuple[float, bool]:
    """Temperature at epoch t and whether hard WTA is active.

    constant:     T0
    linear:       T0 * (1 - t/t_max), clamped at 0
    exponential:  T0 * rho^t
    chunk_linear: T0 * (1 - t/t_max) for t < t_max, then exactly 0
    """
    if t < 0:
        raise ConfigError(f"epoch index must be >= 0, got {t}")
    if spec.kind == "constant":
        raw = spec.t0
    elif spec.kind == "linear":
        raw = max(0.0, spec.t0 * (1.0 - t / spec.t_max))
    elif spec.kind == "exponential":
        raw = spec.t0 * spec.rho**t
    else:  # chunk_linear
        raw = spec.t0 * (1.0 - t / spec.t_max) if t < spec.t_max else 0.0
    if raw <= 0.0 or raw < spec.floor:
        return 0.0, True
    return raw, False


def epsilon_at(epsilon0: float, t: int, t_max: int) -> float:
    """Linearly annealed relaxation weight eps0 * (1 - t/t_max), clamped to [0, eps0]."""
    if not 0.0 <= epsilon0 < 1.0:
        raise ConfigError(f"epsilon0 must be in [0, 1), got {epsilon0}")
    if t < 0:
        raise ConfigError(f"epoch index must be >= 0, got {t}")
    return min(epsilon0, max(0.0, epsilon0 * (1.0 - t / t_max)))
