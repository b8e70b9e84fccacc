"""Multi-head MLP with manual forward/backward passes and SGD/Adam.

A HypothesisBank is a shared ReLU backbone feeding n hypothesis heads
(output dim d2, optionally tanh-bounded) and n sigmoid score heads. All
parameters live in a flat dict of float64 arrays; the backward pass is
exact reverse-mode differentiation of <d_hypotheses, hypotheses> +
<d_scores, scores> summed over the batch.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .numerics import make_rng

CHECKPOINT_VERSION = 1


@dataclass
class BankConfig:
    input_dim: int
    output_dim: int
    n_hypotheses: int
    hidden: tuple[int, ...] = (256, 256)
    head_activation: str = "tanh"  # "tanh" or "none"

    def __post_init__(self):
        self.hidden = tuple(self.hidden)
        if self.n_hypotheses < 1:
            raise ConfigError("need at least one hypothesis head")
        if self.head_activation not in ("tanh", "none"):
            raise ConfigError(f"unknown head activation {self.head_activation!r}")


@dataclass
class Tape:
    """Activation cache from one forward pass, consumed by backward()."""

    x: np.ndarray
    pre: list  # pre-activations per backbone layer
    post: list  # post-ReLU activations per backbone layer
    hypotheses: np.ndarray  # (B, n, d2), after head activation
    scores: np.ndarray  # (B, n)
    version: int


class HypothesisBank:
    """n hypothesis heads and n score heads over a shared ReLU backbone.

    Weight init is He-style uniform fan-in scaling, seeded; the init scheme
    is part of the reproducibility contract, not a tuned choice.
    """

    def __init__(self, config: BankConfig, seed: int = 0):
        self.config = config
        self.version = 0  # bumped on every parameter update; detects stale tapes
        rng = make_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        widths = [config.input_dim, *config.hidden]
        for i in range(len(config.hidden)):
            self.params[f"W{i}"] = self._he_uniform(rng, widths[i], widths[i + 1])
            self.params[f"b{i}"] = np.zeros(widths[i + 1])
        h = widths[-1]
        n, d2 = config.n_hypotheses, config.output_dim
        self.params["Wh"] = self._he_uniform(rng, h, n * d2)
        self.params["bh"] = np.zeros(n * d2)
        self.params["Ws"] = self._he_uniform(rng, h, n)
        self.params["bs"] = np.zeros(n)

    @staticmethod
    def _he_uniform(rng, fan_in, fan_out):
        limit = np.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.config.hidden)

    def forward(self, x: np.ndarray):
        """Run the network; returns (hypotheses, scores, tape).

        Accepts a single input vector (d1,) or a batch (B, d1); outputs are
        always batched: hypotheses (B, n, d2), scores (B, n).
        """
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.config.input_dim:
            raise ShapeError(
                f"input shape {x.shape} incompatible with input_dim={self.config.input_dim}"
            )
        pre, post = [], []
        a = x
        for i in range(self.n_layers):
            z = a @ self.params[f"W{i}"] + self.params[f"b{i}"]
            if not np.all(np.isfinite(z)):
                raise NumericError(f"non-finite activation in backbone layer {i}")
            a = np.maximum(z, 0.0)
            pre.append(z)
            post.append(a)
        raw_h = a @ self.params["Wh"] + self.params["bh"]
        if not np.all(np.isfinite(raw_h)):
            raise NumericError("non-finite activation in hypothesis heads")
        b = x.shape[0]
        n, d2 = self.config.n_hypotheses, self.config.output_dim
        hyp = raw_h.reshape(b, n, d2)
        if self.config.head_activation == "tanh":
            hyp = np.tanh(hyp)
        scores = _sigmoid(a @ self.params["Ws"] + self.params["bs"])
        tape = Tape(x=x, pre=pre, post=post, hypotheses=hyp, scores=scores, version=self.version)
        return hyp, scores, tape

    def backward(self, tape: Tape, d_hypotheses: np.ndarray, d_scores: np.ndarray):
        """Exact parameter gradients of sum_b <d_hyp, hyp> + <d_scores, scores>."""
        if tape.version != self.version:
            raise ValueError("stale tape: parameters changed since the forward pass")
        b = tape.x.shape[0]
        n, d2 = self.config.n_hypotheses, self.config.output_dim
        d_hypotheses = np.asarray(d_hypotheses, dtype=np.float64)
        d_scores = np.asarray(d_scores, dtype=np.float64)
        if d_hypotheses.shape != (b, n, d2) or d_scores.shape != (b, n):
            raise ShapeError("upstream gradient shapes do not match the forward outputs")
        grads: dict[str, np.ndarray] = {}
        d_raw_h = d_hypotheses
        if self.config.head_activation == "tanh":
            d_raw_h = d_hypotheses * (1.0 - tape.hypotheses**2)
        d_raw_h = d_raw_h.reshape(b, n * d2)
        d_raw_s = d_scores * tape.scores * (1.0 - tape.scores)
        top = tape.post[-1] if self.n_layers else tape.x
        grads["Wh"] = top.T @ d_raw_h
        grads["bh"] = d_raw_h.sum(axis=0)
        grads["Ws"] = top.T @ d_raw_s
        grads["bs"] = d_raw_s.sum(axis=0)
        da = d_raw_h @ self.params["Wh"].T + d_raw_s @ self.params["Ws"].T
        for i in range(self.n_layers - 1, -1, -1):
            dz = da * (tape.pre[i] > 0.0)
            below = tape.post[i - 1] if i > 0 else tape.x
            grads[f"W{i}"] = below.T @ dz
            grads[f"b{i}"] = dz.sum(axis=0)
            da = dz @ self.params[f"W{i}"].T
        return grads

    # --- persistence -------------------------------------------------------

    def save(self, path):
        meta = {
            "version": CHECKPOINT_VERSION,
            "input_dim": self.config.input_dim,
            "output_dim": self.config.output_dim,
            "n_hypotheses": self.config.n_hypotheses,
            "hidden": list(self.config.hidden),
            "head_activation": self.config.head_activation,
        }
        arrays = dict(self.params)
        arrays["__meta__"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        with open(path, "wb") as f:
            np.savez(f, **arrays)

    @classmethod
    def load(cls, path) -> "HypothesisBank":
        with np.load(path) as data:
            meta = json.loads(bytes(data["__meta__"]).decode())
            if meta["version"] != CHECKPOINT_VERSION:
                raise ConfigError(f"unsupported checkpoint version {meta['version']}")
            config = BankConfig(
                input_dim=meta["input_dim"],
                output_dim=meta["output_dim"],
                n_hypotheses=meta["n_hypotheses"],
                hidden=tuple(meta["hidden"]),
                head_activation=meta["head_activation"],
            )
            bank = cls(config, seed=0)
            for key in bank.params:
                bank.params[key] = data[key].copy()
        return bank


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class OptimizerState:
    """SGD or Adam state; Adam uses beta1=0.9, beta2=0.999, eps=1e-8."""

    kind: str
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer {self.kind!r}")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning rate must be > 0")


def step(bank: HypothesisBank, state: OptimizerState, grads: dict) -> None:
    """Apply one SGD/Adam update in place. Non-finite gradients abort the update."""
    for key, g in grads.items():
        if key not in bank.params:
            raise ShapeError(f"gradient for unknown parameter {key!r}")
        if g.shape != bank.params[key].shape:
            raise ShapeError(f"gradient shape mismatch for {key!r}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {key!r}; update skipped")
    if state.kind == "sgd":
        for key, g in grads.items():
            bank.params[key] -= state.learning_rate * g
    else:
        state.t += 1
        bc1 = 1.0 - state.beta1**state.t
        bc2 = 1.0 - state.beta2**state.t
        for key, g in grads.items():
            m = state.m.setdefault(key, np.zeros_like(g))
            v = state.v.setdefault(key, np.zeros_like(g))
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            bank.params[key] -= (
                state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
            )
    bank.version += 1
