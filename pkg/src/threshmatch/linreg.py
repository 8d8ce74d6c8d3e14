"""Dense least squares via Householder QR.

Every regression in the package routes through :func:`ols`: the score
regression, the first-difference coefficient fit, and the spline-basis fit.
No intercept is ever added implicitly; callers append a constant column
when their model has one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, RankDeficient

RANK_TOL = 1e-10  # relative floor on |diag R|; fixed, not configurable


@dataclass(frozen=True)
class LinearFit:
    """Least-squares solution with its residual vector.

    ``residuals = b - a @ coef`` for the system the fit was computed on.
    """

    coef: np.ndarray
    residuals: np.ndarray
    rank_tol: float = RANK_TOL


def ols(a: np.ndarray, b: np.ndarray) -> LinearFit:
    """Minimize ``||a @ coef - b||_2`` by reduced QR; deterministic.

    Requires ``m >= p >= 1``.  Rank deficiency (smallest |R_jj| below
    ``RANK_TOL`` times the largest) is a hard error rather than a silent
    ridge or pseudo-inverse fallback, since a regularized score fit would
    bias every residual downstream.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"design must be 2-D, got {a.ndim}-D")
    if b.ndim != 1:
        raise DimensionMismatch(f"response must be 1-D, got {b.ndim}-D")
    m, p = a.shape
    if b.shape[0] != m:
        raise DimensionMismatch(f"design has {m} rows but response has {b.shape[0]}")
    if p < 1:
        raise DimensionMismatch("design needs at least one column")
    if m < p:
        raise DimensionMismatch(f"need at least as many rows ({m}) as columns ({p})")

    q_mat, r_mat = np.linalg.qr(a, mode="reduced")
    diag = np.abs(np.diag(r_mat))
    tol = RANK_TOL * diag.max() if diag.size else 0.0
    p_effective = int(np.sum(diag > tol))
    if p_effective < p:
        raise RankDeficient(p_effective, p)

    coef = solve_triangular(r_mat, q_mat.T @ b, lower=False)
    residuals = b - a @ coef
    return LinearFit(coef=coef, residuals=residuals)
