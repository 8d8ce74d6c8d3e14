"""Shared test helpers: the noiseless-null generator and tiny builders."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from threshmatch import ObservationSet

FIXTURES = Path(__file__).parent / "fixtures"

NULL_BETA = np.array([2.0, -1.0, 0.5])
NULL_GAMMA = np.array([0.0, 0.0, 0.0, 1.0])


def make_null_obs(seed: int, n: int = 300) -> ObservationSet:
    """Noiseless-null sample: zero treatment effect, zero confounder term,
    zero outcome noise, so ``y = x @ beta`` exactly while the score keeps
    its own residual (``q = z @ gamma + eta``)."""
    rng = np.random.default_rng(seed)
    covs = rng.standard_normal((n, 4))
    eta = rng.uniform(-1.0, 1.0, size=n)
    q = covs @ NULL_GAMMA + eta
    x = covs[:, :3]
    y = x @ NULL_BETA
    return ObservationSet(y=y, x=x, z=covs, q=q, tau0=0.0)


def make_pl_obs(
    seed: int,
    n: int,
    beta: np.ndarray,
    ell=None,
    alpha=None,
    eps_sd: float = 0.0,
) -> ObservationSet:
    """Small partially-linear sample with pluggable nuisance pieces.

    ``ell(eta)`` and ``alpha(x, eta)`` default to zero; ``q = z @ (0,0,0,1)
    + eta`` with four standard-normal score covariates.
    """
    rng = np.random.default_rng(seed)
    beta = np.asarray(beta, dtype=np.float64)
    covs = rng.standard_normal((n, 4))
    eta = rng.uniform(-1.0, 1.0, size=n)
    q = covs[:, 3] + eta
    x = covs[:, : beta.shape[0]]
    y = x @ beta
    if ell is not None:
        y = y + ell(eta)
    if alpha is not None:
        y = y + np.where(q >= 0.0, alpha(x, eta), 0.0)
    if eps_sd > 0:
        y = y + rng.normal(0.0, eps_sd, size=n)
    return ObservationSet(y=y, x=x, z=covs, q=q, tau0=0.0)


@pytest.fixture()
def null_obs() -> ObservationSet:
    return make_null_obs(seed=1234)
