"""Resampling-based variance and confidence intervals for the ATT.

Analytic plug-in variance for the matching estimator needs density ratios
and conditional moments that are hard to estimate well, so inference runs
through the n-out-of-n bootstrap instead: resample rows with replacement,
rerun the whole pipeline (fresh split included), and scale the replicate
variance by a third of the sample size -- the size of one split, which is
the effective sample behind a single-run estimate.

Every replicate's randomness is counter-derived from ``(seed, r)``, so
replicate ``r`` can be recomputed alone and parallel execution cannot
change results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .att import estimate_att, estimate_att_crossfit
from .data_model import ObservationSet, split_three_way
from .errors import InputError, InvalidLevel, NumericError, StructuralError, TooManyFailures
from .rng import derive_seed, rng_from

FAILURE_BUDGET = 0.02  # fraction of replicates allowed to fail structurally


@dataclass(frozen=True)
class BootstrapResult:
    """Replicate estimates with the scaled variance and percentile interval."""

    replicates: np.ndarray
    sigma2_hat: float
    ci_low: float
    ci_high: float
    level: float
    b_requested: int
    b_failed: int


def bootstrap_replicate(
    obs: ObservationSet, r: int, seed: int, crossfit: bool = False
) -> float:
    """Compute replicate ``r`` in isolation.

    Draws ``n`` rows with replacement (stream ``(seed, r, 0)``), re-splits
    the resampled data (seed ``(seed, r, 1)``), and runs the pipeline.
    Raises the pipeline's structural errors on degenerate resamples.
    """
    n = obs.n
    rows = rng_from(seed, r, 0).integers(0, n, size=n)
    resampled = obs.take(rows)
    split_seed = derive_seed(seed, r, 1)
    if crossfit:
        return estimate_att_crossfit(resampled, seed=split_seed).theta_cf
    splits = split_three_way(n, seed=split_seed, shuffle=True)
    return estimate_att(resampled, splits).theta_hat


def bootstrap_att(
    obs: ObservationSet,
    b: int,
    level: float = 0.95,
    seed: int = 0,
    crossfit: bool = False,
) -> BootstrapResult:
    """Run ``b`` bootstrap replicates of the ATT pipeline.

    ``sigma2_hat`` is ``floor(n/3)`` times the sample variance of the
    successful replicates; the confidence interval takes the empirical
    ``(1-level)/2`` and ``1-(1-level)/2`` quantiles (linear interpolation
    between order statistics).  Replicates whose resample cannot support
    estimation (say, a split without controls) are dropped, up to a 2%
    budget; beyond that the whole run is rejected.
    """
    if not (0.0 < level < 1.0):
        raise InvalidLevel(level)
    if b < 2:
        raise InputError(f"need at least 2 bootstrap replicates, got {b}")

    values: list[float] = []
    b_failed = 0
    for r in range(b):
        try:
            values.append(bootstrap_replicate(obs, r, seed, crossfit))
        except (StructuralError, NumericError):
            b_failed += 1
    if b_failed > FAILURE_BUDGET * b or b - b_failed < 2:
        raise TooManyFailures(b_failed, b)

    replicates = np.asarray(values)
    n_tilde = obs.n // 3
    sigma2_hat = float(n_tilde * np.var(replicates, ddof=1))
    alpha = (1.0 - level) / 2.0
    ci_low, ci_high = np.quantile(replicates, [alpha, 1.0 - alpha], method="linear")
    return BootstrapResult(
        replicates=replicates,
        sigma2_hat=sigma2_hat,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        level=float(level),
        b_requested=int(b),
        b_failed=int(b_failed),
    )
