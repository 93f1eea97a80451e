"""Shared generators for randomized instance tests."""

import numpy as np

from qrdro.core_model import ModelParams, Policy
from qrdro.distributions import MomentSummary
from qrdro.mad_dro import MadAmbiguity


def random_params(rng: np.random.Generator, support_lo_max: float = 0.3) -> ModelParams:
    """Valid economic parameters with a nondegenerate support."""
    while True:
        p = rng.uniform(0.1, 0.9)
        c = rng.uniform(0.0, 0.4)
        c_m = rng.uniform(0.0, 0.4)
        delta = rng.uniform(0.0, 0.4)
        if p > c + delta + c_m + 1e-3:
            lo = rng.uniform(0.0, support_lo_max)
            hi = lo + rng.uniform(0.3, 1.5)
            return ModelParams(p, c, c_m, delta, lo, hi)


def random_mad(rng: np.random.Generator, params: ModelParams) -> MadAmbiguity:
    """Feasible mean-MAD information on the params support."""
    lo, hi = params.support_lo, params.support_hi
    mu = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
    cap = 2.0 * (mu - lo) * (hi - mu) / (hi - lo)
    return MadAmbiguity(MomentSummary(mu, rng.uniform(0.0, cap)), lo, hi)


def random_policy(rng: np.random.Generator, params: ModelParams) -> Policy:
    lo, hi = params.policy_box()
    x = rng.uniform(lo, hi)
    return Policy(x, rng.uniform(lo, x))
