"""Synthetic data generator and Monte-Carlo validation harness.

The built-in generator draws four standard-normal covariates, a uniform
confounder ``eta`` on (-1, 1), and Gaussian outcome noise with variance
one half, then sets::

    q = x4 + eta                       (threshold tau0 = 0)
    y = alpha(x, eta) * 1{q >= 0} + x1 + x3 + eta / 2 + eps

with the true effect surface either ``alpha = x1^2 + x2*x3`` ("x_only")
or ``alpha = x1^2 + x2*x3 + eta^2`` ("x_and_eta").  The score-side
covariates are ``z = (x1..x4)`` and the outcome-side ones ``x = (x1..x3)``,
so the true score coefficients are ``(0, 0, 0, 1)`` and the true outcome
coefficients ``(1, 0, 1)``.

The sign-flip symmetry ``(x4, eta) -> (-x4, -eta)`` keeps ``eta^2``
invariant while exchanging the treated and control halves, so the treated
fraction is exactly one half and the true ATT is ``E[x1^2] + E[x2*x3] +
E[eta^2]`` = ``1 + 0 + 1/3`` for "x_and_eta" (and ``1`` for "x_only").
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .att import estimate_att, estimate_att_crossfit
from .data_model import ObservationSet, split_three_way
from .errors import DimensionMismatch, ThreshmatchError, TooFewRows
from .ite import SplineBasisSpec, fit_ite, ite_mse
from .residualize import residuals_eta
from .rng import derive_seed, rng_from

X_ONLY = "x_only"
X_AND_ETA = "x_and_eta"

GAMMA_TRUE = np.array([0.0, 0.0, 0.0, 1.0])
BETA_TRUE = np.array([1.0, 0.0, 1.0])
TRUE_ATT = {X_AND_ETA: 4.0 / 3.0, X_ONLY: 1.0}

# Reference variance of the scaled estimation error under this generator;
# Monte-Carlo reports measure their KS distance against N(0, this).
TARGET_ZETA_VARIANCE = 11.455


@dataclass(frozen=True)
class DgpConfig:
    """Size, seed, effect-surface kind, and noise scale of one dataset."""

    n: int
    seed: int
    ite_kind: str = X_AND_ETA
    eps_sd: float = float(np.sqrt(0.5))

    def __post_init__(self):
        if self.n < 9:
            raise TooFewRows(self.n)
        if self.eps_sd <= 0:
            raise DimensionMismatch("eps_sd must be positive")
        if self.ite_kind not in (X_ONLY, X_AND_ETA):
            raise DimensionMismatch(f"unknown ite_kind {self.ite_kind!r}")


def true_ite_fn(ite_kind: str):
    """Vectorized truth ``alpha(x, z, q)`` for the built-in generator.

    The confounder is recovered exactly as ``eta = q - z @ (0,0,0,1)``,
    which only works for data from :func:`generate`.
    """

    def alpha(x: np.ndarray, z: np.ndarray, q: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        base = x[:, 0] ** 2 + x[:, 1] * x[:, 2]
        if ite_kind == X_AND_ETA:
            eta = np.asarray(q) - np.atleast_2d(z) @ GAMMA_TRUE
            return base + eta**2
        return base

    return alpha


def generate(config: DgpConfig) -> ObservationSet:
    """Draw one i.i.d. dataset; bit-identical for a fixed config."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(config.seed)))
    covs = rng.standard_normal((config.n, 4))
    eta = rng.uniform(-1.0, 1.0, size=config.n)
    eps = rng.normal(0.0, config.eps_sd, size=config.n)
    q = covs[:, 3] + eta
    alpha = covs[:, 0] ** 2 + covs[:, 1] * covs[:, 2]
    if config.ite_kind == X_AND_ETA:
        alpha = alpha + eta**2
    y = alpha * (q >= 0.0) + covs[:, 0] + covs[:, 2] + eta / 2.0 + eps
    return ObservationSet(y=y, x=covs[:, :3], z=covs, q=q, tau0=0.0)


def true_att_oracle(samples: int, seed: int = 0, ite_kind: str = X_AND_ETA, alpha_fn=None) -> float:
    """Monte-Carlo evaluation of the true ATT, independent of the estimator.

    Draws fresh ``(x, eta)`` pairs and averages the effect surface over the
    treated region ``x4 + eta >= 0``.  ``alpha_fn(covs, eta)`` may override
    the surface (test hook).
    """
    rng = rng_from(seed)
    total = 0.0
    count = 0
    remaining = int(samples)
    while remaining > 0:
        m = min(remaining, 1_000_000)
        covs = rng.standard_normal((m, 4))
        eta = rng.uniform(-1.0, 1.0, size=m)
        treated = covs[:, 3] + eta >= 0.0
        if alpha_fn is not None:
            alpha = np.asarray(alpha_fn(covs, eta), dtype=np.float64)
        else:
            alpha = covs[:, 0] ** 2 + covs[:, 1] * covs[:, 2]
            if ite_kind == X_AND_ETA:
                alpha = alpha + eta**2
        total += float(alpha[treated].sum())
        count += int(treated.sum())
        remaining -= m
    return total / count


@dataclass(frozen=True)
class McReport:
    """Moments, normality diagnostics, and histogram of the scaled errors."""

    zetas: np.ndarray
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_stat: float
    histogram: list[tuple[float, float, int]]

    def to_json_dict(self) -> dict:
        return {
            "zetas": [float(z) for z in self.zetas],
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_stat": self.ks_stat,
            "histogram": [
                {"bin_left": left, "bin_right": right, "count": count}
                for left, right, count in self.histogram
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def write_histogram_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("bin_left,bin_right,count\n")
            for left, right, count in self.histogram:
                fh.write(f"{left!r},{right!r},{count}\n")


def _report_from_zetas(zetas: np.ndarray) -> McReport:
    counts, edges = np.histogram(zetas, bins="fd")
    histogram = [
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))
    ]
    ks = stats.kstest(zetas, stats.norm(loc=0.0, scale=np.sqrt(TARGET_ZETA_VARIANCE)).cdf)
    return McReport(
        zetas=zetas,
        mean=float(np.mean(zetas)),
        variance=float(np.var(zetas, ddof=1)),
        skewness=float(stats.skew(zetas)),
        excess_kurtosis=float(stats.kurtosis(zetas)),
        ks_stat=float(ks.statistic),
        histogram=histogram,
    )


def monte_carlo_att(
    config: DgpConfig, reps: int, crossfit: bool = False, master_seed: int = 0
) -> McReport:
    """Repeatedly generate and estimate, reporting the scaled errors.

    Replicate ``k`` draws its dataset from stream ``(master_seed, k, 0)``
    and its split from ``(master_seed, k, 1)``.  The scaled error is
    ``sqrt(n/3) * (theta_hat - theta0)`` for single runs and
    ``sqrt(n) * (theta_cf - theta0)`` for cross-fitted ones.
    """
    if reps < 30:
        raise DimensionMismatch("need at least 30 replicates for stable moments")
    theta0 = TRUE_ATT[config.ite_kind]
    scale = np.sqrt(config.n if crossfit else config.n // 3)
    zetas = np.empty(reps)
    for k in range(reps):
        obs = generate(replace(config, seed=derive_seed(master_seed, k, 0)))
        run_seed = derive_seed(master_seed, k, 1)
        try:
            if crossfit:
                theta = estimate_att_crossfit(obs, seed=run_seed).theta_cf
            else:
                splits = split_three_way(obs.n, seed=run_seed, shuffle=True)
                theta = estimate_att(obs, splits).theta_hat
        except ThreshmatchError as exc:
            exc.split = f"replicate {k}" if exc.split is None else f"replicate {k}: {exc.split}"
            raise
        zetas[k] = scale * (theta - theta0)
    return _report_from_zetas(zetas)


def monte_carlo_ite(config: DgpConfig, spec: SplineBasisSpec, seeds: list[int]) -> list[float]:
    """Per-seed MSE of the fitted effect surface against the known truth.

    Each seed runs the single-split pipeline, fits the surface on the
    matching split's treated rows, and scores it against the generator's
    true surface on those same rows.
    """
    truth = true_ite_fn(config.ite_kind)
    mses: list[float] = []
    for s in seeds:
        obs = generate(replace(config, seed=derive_seed(s, 0)))
        splits = split_three_way(obs.n, seed=derive_seed(s, 1), shuffle=True)
        est = estimate_att(obs, splits)
        eta_hat = np.full(obs.n, np.nan)
        idx23 = np.concatenate([splits.i2, splits.i3])
        eta_hat[idx23] = residuals_eta(est.gamma, obs, idx23)
        model = fit_ite(
            obs, splits, est.beta, est.matches, eta_hat, spec, cv_seed=derive_seed(s, 2)
        )
        mses.append(ite_mse(model, obs, splits, eta_hat, truth))
    return mses
