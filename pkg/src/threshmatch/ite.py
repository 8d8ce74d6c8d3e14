"""Individual treatment effect surface via spline-basis regression.

After the pipeline's matching step, the matched adjusted-outcome gap of a
treated observation is (up to noise) its individual treatment effect.
Regressing those gaps on the treated rows' covariates -- and, when the
effect is allowed to depend on the unobserved confounder, on ``eta_hat``
as well -- recovers the effect surface nonparametrically.

The regression design is additive cubic B-spline blocks per covariate
(interior knots at equally spaced quantiles of the training values), an
explicit constant column, and optionally the pairwise products of distinct
raw covariates.  The per-covariate degrees of freedom are chosen by 4-fold
cross-validation over a small grid.  Evaluation outside the training range
clamps to the boundary knots, so predictions stay bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
from scipy.interpolate import BSpline

from .att import matched_differences
from .data_model import ObservationSet, SplitAssignment, treatment_mask
from .diff_beta import BetaFit
from .errors import ArityMismatch, DegenerateCovariate, DimensionMismatch, TooFewRows
from .linreg import ols
from .matching import MatchResult
from .rng import rng_from

DEFAULT_DF_GRID = (3, 4, 5, 6, 8, 10)
CV_FOLDS = 4


@dataclass(frozen=True)
class SplineBasisSpec:
    """Configuration of the spline regression design.

    ``df`` is the per-covariate degrees of freedom actually used to build
    a basis; it is None until cross-validation picks one from ``df_grid``.
    """

    df_grid: tuple[int, ...] = DEFAULT_DF_GRID
    degree: int = 3
    include_eta: bool = False
    interactions: bool = True
    df: int | None = None

    def __post_init__(self):
        grid = tuple(int(v) for v in self.df_grid)
        if not grid:
            raise DimensionMismatch("df_grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DimensionMismatch("df_grid must be strictly increasing")
        if grid[0] < self.degree:
            raise DimensionMismatch(f"every df must be >= degree ({self.degree})")
        if self.df is not None and self.df < self.degree:
            raise DimensionMismatch(f"df must be >= degree ({self.degree})")
        object.__setattr__(self, "df_grid", grid)

    def dimension(self, n_covariates: int, df: int | None = None) -> int:
        """Number of design columns for ``n_covariates`` raw covariates."""
        df = self.df if df is None else df
        cols = 1 + n_covariates * df
        if self.interactions:
            cols += n_covariates * (n_covariates - 1) // 2
        return cols


@dataclass(frozen=True)
class IteModel:
    """Fitted effect-surface model: knots, chosen spec, and coefficients."""

    basis: SplineBasisSpec
    knots: list[np.ndarray]
    coef: np.ndarray
    training_mse: float

    @property
    def n_covariates(self) -> int:
        return len(self.knots)

    @property
    def d_x(self) -> int:
        return self.n_covariates - (1 if self.basis.include_eta else 0)


def quantile_knots(values: np.ndarray, df: int, degree: int, col: int = 0) -> np.ndarray:
    """Augmented knot vector with interior knots at equally spaced quantiles.

    ``df - degree`` interior knots sit at quantiles ``j / (df - degree + 1)``
    of the training values; the boundary knots (repeated ``degree + 1``
    times) sit at the training min and max.
    """
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        raise DegenerateCovariate(col)
    n_interior = df - degree
    if n_interior > 0:
        qs = np.arange(1, n_interior + 1) / (n_interior + 1)
        interior = np.quantile(values, qs)
    else:
        interior = np.empty(0)
    return np.concatenate([[lo] * (degree + 1), interior, [hi] * (degree + 1)])


def bspline_block(values: np.ndarray, knots: np.ndarray, degree: int) -> np.ndarray:
    """All B-spline basis functions over ``knots``, evaluated with clamping.

    Rows sum to one inside the knot range (partition of unity); values
    outside the boundary knots are clamped onto it first.
    """
    values = np.clip(np.asarray(values, dtype=np.float64), knots[0], knots[-1])
    return BSpline.design_matrix(values, knots, degree).toarray()


def build_basis(
    covariates: np.ndarray,
    spec: SplineBasisSpec,
    knots: list[np.ndarray] | None = None,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Assemble the regression design for an ``m x d`` covariate matrix.

    Layout: constant column, then one spline block per covariate (the
    block's first basis function is dropped, since the constant column
    already carries the level), then pairwise products of distinct raw
    covariates when interactions are on.  When ``knots`` is None they are
    computed from the covariates themselves (training mode), which
    requires at least as many rows as design columns.
    """
    covariates = np.atleast_2d(np.asarray(covariates, dtype=np.float64))
    m, d = covariates.shape
    if spec.df is None:
        raise DimensionMismatch("spec.df is unset; pick a df before building a basis")
    training = knots is None
    if training:
        if m < spec.dimension(d):
            raise TooFewRows(m, spec.dimension(d))
        knots = [
            quantile_knots(covariates[:, j], spec.df, spec.degree, col=j) for j in range(d)
        ]
    if len(knots) != d:
        raise ArityMismatch(f"model has {len(knots)} covariates, got {d}")

    blocks = [np.ones((m, 1))]
    for j in range(d):
        full = bspline_block(covariates[:, j], knots[j], spec.degree)
        blocks.append(full[:, 1:])
    if spec.interactions:
        for a, b in combinations(range(d), 2):
            blocks.append((covariates[:, a] * covariates[:, b])[:, None])
    return np.hstack(blocks), knots


def _treated_covariates(
    obs: ObservationSet,
    splits: SplitAssignment,
    eta_hat: np.ndarray,
    include_eta: bool,
) -> tuple[np.ndarray, np.ndarray]:
    mask = treatment_mask(obs)
    treated3 = splits.i3[mask[splits.i3]]
    cov = obs.x[treated3]
    if include_eta:
        cov = np.hstack([cov, np.asarray(eta_hat)[treated3][:, None]])
    return treated3, cov


def fit_ite(
    obs: ObservationSet,
    splits: SplitAssignment,
    beta: BetaFit,
    matches: MatchResult,
    eta_hat: np.ndarray,
    spec: SplineBasisSpec,
    cv_seed: int = 0,
) -> IteModel:
    """Fit the effect surface on the matching split's treated rows.

    The response is the matched adjusted-outcome gap per treated row; the
    covariates are that row's ``x`` (plus its ``eta_hat`` when the spec
    includes it).  ``df`` is chosen by 4-fold cross-validation minimizing
    mean validation MSE, ties to the smaller df; the returned model is
    refit on all treated rows at the chosen df.
    """
    treated3, cov = _treated_covariates(obs, splits, eta_hat, spec.include_eta)
    response = matched_differences(obs, beta.beta_hat, matches)
    if response.shape[0] != cov.shape[0]:
        raise DimensionMismatch(
            f"{response.shape[0]} matched pairs vs {cov.shape[0]} treated rows"
        )
    m, d = cov.shape
    max_dim = spec.dimension(d, df=spec.df_grid[-1])
    if m < max_dim:
        raise TooFewRows(m, max_dim)

    perm = rng_from(cv_seed).permutation(m)
    folds = np.array_split(perm, CV_FOLDS)
    if m - max(len(f) for f in folds) < max_dim:
        raise TooFewRows(m, max_dim + max(len(f) for f in folds))

    best_df, best_mse = None, np.inf
    for df in spec.df_grid:
        cand = replace(spec, df=int(df))
        fold_mse = []
        for hold in folds:
            train = np.setdiff1d(perm, hold, assume_unique=True)
            design, knots = build_basis(cov[train], cand)
            fit = ols(design, response[train])
            held_design, _ = build_basis(cov[hold], cand, knots)
            err = response[hold] - held_design @ fit.coef
            fold_mse.append(float(np.mean(err**2)))
        mean_mse = float(np.mean(fold_mse))
        if mean_mse < best_mse:
            best_df, best_mse = int(df), mean_mse

    chosen = replace(spec, df=best_df)
    design, knots = build_basis(cov, chosen)
    fit = ols(design, response)
    training_mse = float(np.mean(fit.residuals**2))
    return IteModel(basis=chosen, knots=knots, coef=fit.coef, training_mse=training_mse)


def predict_ite_batch(model: IteModel, covariates: np.ndarray) -> np.ndarray:
    """Evaluate the surface on an ``m x d`` covariate matrix (clamped)."""
    design, _ = build_basis(covariates, model.basis, model.knots)
    if design.shape[1] != model.coef.shape[0]:
        raise ArityMismatch(
            f"design has {design.shape[1]} columns, model has {model.coef.shape[0]}"
        )
    return design @ model.coef


def predict_ite(model: IteModel, x: np.ndarray, eta_hat: float | None = None) -> float:
    """Evaluate the surface at one covariate point.

    ``eta_hat`` must be supplied exactly when the model was fit with it.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if model.basis.include_eta:
        if eta_hat is None:
            raise ArityMismatch("model includes eta_hat; pass eta_hat=")
        row = np.concatenate([x, [float(eta_hat)]])
    else:
        if eta_hat is not None:
            raise ArityMismatch("model was fit without eta_hat; do not pass it")
        row = x
    if row.shape[0] != model.n_covariates:
        raise ArityMismatch(f"expected {model.d_x} covariates, got {x.shape[0]}")
    return float(predict_ite_batch(model, row[None, :])[0])


def ite_mse(
    model: IteModel,
    obs: ObservationSet,
    splits: SplitAssignment,
    eta_hat: np.ndarray,
    truth,
) -> float:
    """Mean squared error of the fitted surface against a known truth.

    ``truth(x, z, q)`` receives the treated rows' covariate matrices and
    score vector and returns the true effect per row; only simulations can
    supply it.  The average runs over the matching split's treated rows,
    with the model evaluated at ``(x, eta_hat)`` exactly as it predicts.
    """
    treated3, cov = _treated_covariates(obs, splits, eta_hat, model.basis.include_eta)
    predicted = predict_ite_batch(model, cov)
    actual = np.asarray(
        truth(obs.x[treated3], obs.z[treated3], obs.q[treated3]), dtype=np.float64
    )
    return float(np.mean((predicted - actual) ** 2))


def save_ite_model(model: IteModel, path: str) -> None:
    """Serialize to a flat text file; floats in hex so round-trips are bit-exact."""
    lines = ["threshmatch-ite-model v1"]
    spec = model.basis
    lines.append(f"degree {spec.degree}")
    lines.append(f"df {spec.df}")
    lines.append(f"df_grid {','.join(str(v) for v in spec.df_grid)}")
    lines.append(f"include_eta {int(spec.include_eta)}")
    lines.append(f"interactions {int(spec.interactions)}")
    lines.append(f"training_mse {float(model.training_mse).hex()}")
    for j, kn in enumerate(model.knots):
        lines.append(f"knots{j} " + " ".join(float(v).hex() for v in kn))
    lines.append("coef " + " ".join(float(v).hex() for v in model.coef))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_ite_model(path: str) -> IteModel:
    """Inverse of :func:`save_ite_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != "threshmatch-ite-model v1":
        raise ArityMismatch(f"{path}: not a threshmatch ITE model file")
    fields: dict[str, str] = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        fields[key] = rest
    knot_keys = sorted((k for k in fields if k.startswith("knots")), key=lambda s: int(s[5:]))
    knots = [
        np.array([float.fromhex(tok) for tok in fields[k].split()]) for k in knot_keys
    ]
    spec = SplineBasisSpec(
        df_grid=tuple(int(v) for v in fields["df_grid"].split(",")),
        degree=int(fields["degree"]),
        include_eta=bool(int(fields["include_eta"])),
        interactions=bool(int(fields["interactions"])),
        df=int(fields["df"]),
    )
    coef = np.array([float.fromhex(tok) for tok in fields["coef"].split()])
    return IteModel(
        basis=spec,
        knots=knots,
        coef=coef,
        training_mse=float.fromhex(fields["training_mse"]),
    )
