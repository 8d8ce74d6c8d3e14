"""Observation container, CSV ingestion, and the three-way sample split.

The estimator consumes columnar samples ``(y, x, z, q)`` plus a fixed
threshold ``tau0``: ``y`` is the outcome, ``q`` the score that allocates
treatment, ``x`` the outcome-side covariates, and ``z`` the score-side
covariates.  Treatment is assigned whenever ``q >= tau0`` -- the cutoff
itself is treated.  ``x`` and ``z`` may share columns (including ``x == z``).
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    MissingColumn,
    NonFiniteValue,
    ParseError,
    TooFewRows,
)

MIN_ROWS = 9  # smallest n for which each of the three splits is nonempty

# Plain decimal or scientific notation only: no underscores, no locale
# separators, no inf/nan spellings.  Keeps file parsing bit-reproducible.
_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class ObservationSet:
    """Immutable columnar sample.

    Attributes
    ----------
    y : (n,) outcome values
    x : (n, dX) outcome-side covariates
    z : (n, dZ) score-side covariates
    q : (n,) score values
    tau0 : treatment threshold; rows with ``q >= tau0`` are treated
    """

    y: np.ndarray
    x: np.ndarray
    z: np.ndarray
    q: np.ndarray
    tau0: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        z = np.atleast_2d(np.asarray(self.z, dtype=np.float64))
        q = np.asarray(self.q, dtype=np.float64)
        if y.ndim != 1 or q.ndim != 1:
            raise DimensionMismatch("y and q must be one-dimensional")
        n = y.shape[0]
        if not (x.shape[0] == z.shape[0] == q.shape[0] == n):
            raise DimensionMismatch(
                f"row counts differ: y={n}, x={x.shape[0]}, z={z.shape[0]}, q={q.shape[0]}"
            )
        if n < MIN_ROWS:
            raise TooFewRows(n, MIN_ROWS)
        if x.shape[1] < 1 or z.shape[1] < 1:
            raise DimensionMismatch("x and z need at least one column each")
        for name, arr in (("y", y), ("x", x), ("z", z), ("q", q)):
            if not np.all(np.isfinite(arr)):
                bad = np.argwhere(~np.isfinite(arr))[0]
                raise NonFiniteValue(int(bad[0]), name)
        if not np.isfinite(self.tau0):
            raise NonFiniteValue(-1, "tau0")
        y.setflags(write=False)
        x.setflags(write=False)
        z.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "tau0", float(self.tau0))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d_x(self) -> int:
        return self.x.shape[1]

    @property
    def d_z(self) -> int:
        return self.z.shape[1]

    def with_z_intercept(self) -> "ObservationSet":
        """Return a copy whose z matrix carries an appended constant column.

        The score regression has no implicit intercept; callers opt in here.
        """
        ones = np.ones((self.n, 1))
        return ObservationSet(self.y, self.x, np.hstack([self.z, ones]), self.q, self.tau0)

    def take(self, idx: np.ndarray) -> "ObservationSet":
        """Return the row subset (with repetition allowed, for resampling)."""
        idx = np.asarray(idx, dtype=np.intp)
        return ObservationSet(self.y[idx], self.x[idx], self.z[idx], self.q[idx], self.tau0)


@dataclass(frozen=True)
class ColumnSpec:
    """Names mapping CSV columns onto the estimator's roles.

    ``x_cols`` and ``z_cols`` may overlap or coincide; ``y_col`` and
    ``q_col`` must be distinct.
    """

    y_col: str
    q_col: str
    x_cols: list[str]
    z_cols: list[str]
    tau0: float

    def __post_init__(self):
        if self.y_col == self.q_col:
            raise DimensionMismatch("y_col and q_col must be distinct columns")
        if not self.x_cols or not self.z_cols:
            raise DimensionMismatch("x_cols and z_cols must be nonempty")


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint index partition ``i1, i2, i3`` covering ``{0..n-1}``.

    The first two parts have ``floor(n/3)`` rows each and the third takes
    the remainder.  Index lists are stored sorted ascending; membership,
    not order, is what a split means.
    """

    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    seed: int
    n: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "i1", np.sort(np.asarray(self.i1, dtype=np.intp)))
        object.__setattr__(self, "i2", np.sort(np.asarray(self.i2, dtype=np.intp)))
        object.__setattr__(self, "i3", np.sort(np.asarray(self.i3, dtype=np.intp)))
        n = len(self.i1) + len(self.i2) + len(self.i3)
        object.__setattr__(self, "n", n)

    def rotations(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """The three cyclic role rotations used by cross-fitting."""
        return [
            (self.i1, self.i2, self.i3),
            (self.i2, self.i3, self.i1),
            (self.i3, self.i1, self.i2),
        ]


def split_three_way(n: int, seed: int = 0, shuffle: bool = True) -> SplitAssignment:
    """Partition ``{0..n-1}`` into three parts of sizes ``(k, k, n-2k)``, ``k = n//3``.

    With ``shuffle`` the indices are permuted by a seeded pseudorandom
    permutation before slicing, which restores exchangeability for files
    that arrive sorted; without it the slices follow natural row order.
    Deterministic for fixed ``(n, seed, shuffle)``.
    """
    if n < MIN_ROWS:
        raise TooFewRows(n, MIN_ROWS)
    order = np.arange(n, dtype=np.intp)
    if shuffle:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
        order = rng.permutation(n).astype(np.intp)
    k = n // 3
    return SplitAssignment(order[:k], order[k : 2 * k], order[2 * k :], seed=int(seed))


def treatment_mask(obs: ObservationSet) -> np.ndarray:
    """Boolean vector: True where ``q >= tau0``.  The cutoff itself is treated."""
    return obs.q >= obs.tau0


def check_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Validate an index list against ``n`` rows; returns it as ``intp``."""
    idx = np.asarray(idx, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        bad = idx[(idx < 0) | (idx >= n)][0]
        raise IndexOutOfRange(int(bad), n)
    return idx


def _parse_cell(cell: str, row: int, col: str) -> float:
    text = cell.strip()
    if not _NUMBER_RE.match(text):
        raise ParseError(row, col, cell)
    value = float(text)
    if not np.isfinite(value):
        raise NonFiniteValue(row, col)
    return value


def load_csv(path: str, spec: ColumnSpec) -> ObservationSet:
    """Read a UTF-8, comma-separated, header-first CSV into an ObservationSet.

    Cells must be plain decimal or scientific notation; anything else
    (missing cells, locale separators, inf/nan spellings) is an error.
    Row order is preserved.  Shared x/z columns are duplicated into both
    matrices.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TooFewRows(0, MIN_ROWS) from None
        header = [h.strip() for h in header]
        col_pos: dict[str, int] = {}
        for name in [spec.y_col, spec.q_col, *spec.x_cols, *spec.z_cols]:
            if name not in header:
                raise MissingColumn(name)
            col_pos[name] = header.index(name)
        rows: list[list[str]] = []
        for raw in reader:
            if not raw or (len(raw) == 1 and raw[0].strip() == ""):
                continue  # tolerate a trailing blank line
            rows.append(raw)

    n = len(rows)
    if n < MIN_ROWS:
        raise TooFewRows(n, MIN_ROWS)

    def column(name: str) -> np.ndarray:
        pos = col_pos[name]
        out = np.empty(n, dtype=np.float64)
        for r, raw in enumerate(rows):
            if pos >= len(raw):
                raise ParseError(r, name, "<missing>")
            out[r] = _parse_cell(raw[pos], r, name)
        return out

    y = column(spec.y_col)
    q = column(spec.q_col)
    x = np.column_stack([column(c) for c in spec.x_cols])
    z = np.column_stack([column(c) for c in spec.z_cols])
    return ObservationSet(y=y, x=x, z=z, q=q, tau0=spec.tau0)


def write_csv(path: str, obs: ObservationSet, spec: ColumnSpec) -> None:
    """Serialize an ObservationSet back to CSV with round-trippable floats.

    Columns are emitted in the order ``y, x_cols, z_cols (new ones only),
    q``; values use shortest round-trip decimal representation.
    """
    names: list[str] = []
    columns: list[np.ndarray] = []

    def emit(name: str, col: np.ndarray) -> None:
        if name not in names:
            names.append(name)
            columns.append(col)

    emit(spec.y_col, obs.y)
    for j, c in enumerate(spec.x_cols):
        emit(c, obs.x[:, j])
    for j, c in enumerate(spec.z_cols):
        emit(c, obs.z[:, j])
    emit(spec.q_col, obs.q)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for r in range(obs.n):
            writer.writerow([repr(float(col[r])) for col in columns])
