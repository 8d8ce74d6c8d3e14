"""Nearest-control matching on estimated score residuals.

Each treated observation is paired with the control whose ``eta_hat`` is
closest in absolute value, with replacement.  Equidistant candidates
resolve toward the smaller ``eta_hat`` value and then the smaller original
index -- a probability-zero event for continuous residuals, pinned down
only so results are deterministic.

:func:`match_controls` sorts the controls once and binary-searches each
treated value, O((n0 + n1) log n0).  :func:`match_controls_brute` is the
exhaustive O(n0 * n1) reference with the identical tie rule; it ships so
equivalence can be asserted on random instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyControlGroup, EmptyTreatedGroup


@dataclass(frozen=True)
class MatchResult:
    """Matched pairs plus the per-control reuse counts.

    ``pairs`` holds ``(treated_index, control_index)`` in treated input
    order.  ``k_counts`` maps each matched control index to the number of
    treated observations it serves; controls never used do not appear.
    """

    pairs: list[tuple[int, int]]
    k_counts: dict[int, int]


def _validate(eta_treated, treated_idx, eta_control, control_idx):
    eta_treated = np.asarray(eta_treated, dtype=np.float64)
    eta_control = np.asarray(eta_control, dtype=np.float64)
    treated_idx = np.asarray(treated_idx, dtype=np.intp)
    control_idx = np.asarray(control_idx, dtype=np.intp)
    if eta_treated.size == 0:
        raise EmptyTreatedGroup()
    if eta_control.size == 0:
        raise EmptyControlGroup()
    return eta_treated, treated_idx, eta_control, control_idx


def match_controls(
    eta_treated: np.ndarray,
    treated_idx: np.ndarray,
    eta_control: np.ndarray,
    control_idx: np.ndarray,
) -> MatchResult:
    """Match every treated value to its nearest control value.

    ``eta_treated[k]`` belongs to original row ``treated_idx[k]``, and
    likewise for the controls.
    """
    eta_treated, treated_idx, eta_control, control_idx = _validate(
        eta_treated, treated_idx, eta_control, control_idx
    )
    order = np.lexsort((control_idx, eta_control))
    vals = eta_control[order]
    idxs = control_idx[order]
    n0 = vals.shape[0]

    pos = np.searchsorted(vals, eta_treated, side="left")
    left = np.clip(pos - 1, 0, n0 - 1)
    right = np.clip(pos, 0, n0 - 1)
    d_left = np.where(pos > 0, np.abs(eta_treated - vals[left]), np.inf)
    d_right = np.where(pos < n0, np.abs(vals[right] - eta_treated), np.inf)
    # ties (d_left == d_right) go left: the left candidate has the smaller value
    take_left = d_left <= d_right
    winner = np.where(take_left, left, right)

    # canonicalize within equal-value runs to the smallest original index,
    # which sits first under the lexicographic sort
    winner_first = np.searchsorted(vals, vals[winner], side="left")
    matched = idxs[winner_first]

    pairs = [(int(t), int(c)) for t, c in zip(treated_idx, matched)]
    counts: dict[int, int] = {}
    for _, c in pairs:
        counts[c] = counts.get(c, 0) + 1
    return MatchResult(pairs=pairs, k_counts=counts)


def match_controls_brute(
    eta_treated: np.ndarray,
    treated_idx: np.ndarray,
    eta_control: np.ndarray,
    control_idx: np.ndarray,
) -> MatchResult:
    """Exhaustive-scan reference implementation of :func:`match_controls`."""
    eta_treated, treated_idx, eta_control, control_idx = _validate(
        eta_treated, treated_idx, eta_control, control_idx
    )
    pairs: list[tuple[int, int]] = []
    counts: dict[int, int] = {}
    for t_val, t_idx in zip(eta_treated, treated_idx):
        best = None
        for c_val, c_idx in zip(eta_control, control_idx):
            key = (abs(t_val - c_val), c_val, c_idx)
            if best is None or key < best[0]:
                best = (key, int(c_idx))
        pairs.append((int(t_idx), best[1]))
        counts[best[1]] = counts.get(best[1], 0) + 1
    return MatchResult(pairs=pairs, k_counts=counts)
