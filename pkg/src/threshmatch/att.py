"""End-to-end ATT estimation and cross-fitting.

One pipeline run walks the three splits in role order: the first split
fits the score regression, the control rows of the second fit the
difference regression, and the third supplies the treated/control pools
for residual matching.  The estimate is the average, over matched pairs,
of the difference in linearly-adjusted outcomes::

    theta_hat = mean_i [ (y_i - x_i @ beta_hat) - (y_c(i) - x_c(i) @ beta_hat) ]

Cross-fitting reruns the pipeline under the three cyclic role rotations of
one fixed partition and averages the resulting estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import ObservationSet, SplitAssignment, split_three_way, treatment_mask
from .diff_beta import BetaFit, fit_beta
from .errors import EmptyControlGroup, EmptyTreatedGroup, ThreshmatchError
from .matching import MatchResult, match_controls
from .residualize import GammaFit, fit_gamma, residuals_eta


@dataclass(frozen=True)
class AttEstimate:
    """ATT point estimate with the full ledger of intermediate fits."""

    theta_hat: float
    beta: BetaFit
    gamma: GammaFit
    matches: MatchResult
    n_treated_i3: int
    n_control_i3: int


@dataclass(frozen=True)
class CrossfitEstimate:
    """Mean of the three rotation estimates, ``(t1 + t2 + t3) / 3``."""

    theta_cf: float
    rotations: list[AttEstimate]


def _labeled(exc: ThreshmatchError, split: str) -> ThreshmatchError:
    exc.split = split
    return exc


def matched_differences(
    obs: ObservationSet, beta_hat: np.ndarray, matches: MatchResult
) -> np.ndarray:
    """Adjusted-outcome gaps ``(y_t - x_t @ b) - (y_c - x_c @ b)`` per pair."""
    t_idx = np.fromiter((t for t, _ in matches.pairs), dtype=np.intp)
    c_idx = np.fromiter((c for _, c in matches.pairs), dtype=np.intp)
    adj_t = obs.y[t_idx] - obs.x[t_idx] @ beta_hat
    adj_c = obs.y[c_idx] - obs.x[c_idx] @ beta_hat
    return adj_t - adj_c


def estimate_att(obs: ObservationSet, splits: SplitAssignment) -> AttEstimate:
    """Run the full pipeline on one split assignment in role order (i1, i2, i3)."""
    return _estimate_with_roles(obs, splits.i1, splits.i2, splits.i3)


def _estimate_with_roles(
    obs: ObservationSet,
    gamma_split: np.ndarray,
    beta_split: np.ndarray,
    match_split: np.ndarray,
) -> AttEstimate:
    try:
        gamma = fit_gamma(obs, gamma_split)
    except ThreshmatchError as exc:
        raise _labeled(exc, "I1")

    # residuals are needed on the second and third splits only; rows of the
    # first split keep NaN so accidental use fails loudly
    eta_hat = np.full(obs.n, np.nan)
    idx23 = np.concatenate([beta_split, match_split])
    eta_hat[idx23] = residuals_eta(gamma, obs, idx23)

    try:
        beta = fit_beta(obs, beta_split, eta_hat)
    except ThreshmatchError as exc:
        raise _labeled(exc, "I2")

    mask = treatment_mask(obs)
    treated3 = match_split[mask[match_split]]
    control3 = match_split[~mask[match_split]]
    try:
        if treated3.size == 0:
            raise EmptyTreatedGroup()
        if control3.size == 0:
            raise EmptyControlGroup()
        matches = match_controls(eta_hat[treated3], treated3, eta_hat[control3], control3)
    except ThreshmatchError as exc:
        raise _labeled(exc, "I3")

    theta_hat = float(np.mean(matched_differences(obs, beta.beta_hat, matches)))
    return AttEstimate(
        theta_hat=theta_hat,
        beta=beta,
        gamma=gamma,
        matches=matches,
        n_treated_i3=int(treated3.size),
        n_control_i3=int(control3.size),
    )


def estimate_att_crossfit(obs: ObservationSet, seed: int = 0) -> CrossfitEstimate:
    """Average the pipeline over the three cyclic role rotations.

    One partition is drawn from ``seed`` (seeded shuffle); the rotations
    reuse its blocks with roles shifted, so every block serves once in each
    role.  A failure in any rotation aborts the whole estimate.
    """
    splits = split_three_way(obs.n, seed=seed, shuffle=True)
    return crossfit_on_splits(obs, splits)


def crossfit_on_splits(obs: ObservationSet, splits: SplitAssignment) -> CrossfitEstimate:
    """Cross-fit over the rotations of an existing partition."""
    rotations: list[AttEstimate] = []
    for r, (g, b, m) in enumerate(splits.rotations()):
        try:
            rotations.append(_estimate_with_roles(obs, g, b, m))
        except ThreshmatchError as exc:
            exc.split = f"rotation {r}: {exc.split}"
            raise
    theta_cf = (
        rotations[0].theta_hat + rotations[1].theta_hat + rotations[2].theta_hat
    ) / 3.0
    return CrossfitEstimate(theta_cf=theta_cf, rotations=rotations)
