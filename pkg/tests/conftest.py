import numpy as np
import pytest

from amcl.network import BankConfig, HypothesisBank


def constant_bank(points, score_logits=None, input_dim=1):
    """Bank whose hypotheses are the given constant points for every input.

    All weights zero except the hypothesis-head biases; with linear heads
    the outputs equal the biases exactly. Score logits default to 0
    (scores 0.5).
    """
    points = np.asarray(points, dtype=np.float64)
    n, d2 = points.shape
    bank = HypothesisBank(
        BankConfig(
            input_dim=input_dim,
            output_dim=d2,
            n_hypotheses=n,
            hidden=(4,),
            head_activation="none",
        ),
        seed=0,
    )
    for key in bank.params:
        bank.params[key] = np.zeros_like(bank.params[key])
    bank.params["bh"] = points.ravel().copy()
    if score_logits is not None:
        bank.params["bs"] = np.asarray(score_logits, dtype=np.float64).copy()
    return bank


def random_bank(rng, input_dim=3, output_dim=2, n=4, hidden=(6,), head_activation="tanh"):
    seed = int(rng.integers(0, 2**31))
    return HypothesisBank(
        BankConfig(
            input_dim=input_dim,
            output_dim=output_dim,
            n_hypotheses=n,
            hidden=hidden,
            head_activation=head_activation,
        ),
        seed=seed,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
