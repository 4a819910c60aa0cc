"""Discrete domain, object support and admissible-section geometry.

Images are ``(N, N)`` arrays indexed ``[row, col]``.  Row 0 is the top of the
image (largest ``y``) and column 0 the left edge (smallest ``x``).  Pixel
centres are the interior nodes of an ``N + 1`` partition of each axis, so
the spacing between neighbouring pixels equals the quadrature step ``tau``.
All indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid2D:
    """Uniform pixel grid over ``[x_min, x_max] x [y_min, y_max]``."""

    N: int
    x_min: float = 0.0
    x_max: float = 2.0
    y_min: float = -1.0
    y_max: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid bounds must have positive extent")

    @property
    def tau(self) -> float:
        """Quadrature / pixel step along x, ``(x_max - x_min) / (N + 1)``."""
        return (self.x_max - self.x_min) / (self.N + 1)

    @property
    def tau_y(self) -> float:
        return (self.y_max - self.y_min) / (self.N + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @property
    def xs(self) -> np.ndarray:
        """x coordinate of every column."""
        return self.x_min + self.tau * np.arange(1, self.N + 1)

    @property
    def ys(self) -> np.ndarray:
        """y coordinate of every row (descending)."""
        return self.y_max - self.tau_y * np.arange(1, self.N + 1)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, Y)`` arrays of pixel-centre coordinates, shape ``(N, N)``."""
        return np.meshgrid(self.xs, self.ys)

    def column_of(self, x: float) -> int:
        """Index of the column whose centre is closest to ``x``."""
        return int(np.clip(round((x - self.x_min) / self.tau) - 1, 0, self.N - 1))

    def row_of(self, y: float) -> int:
        return int(np.clip(round((self.y_max - y) / self.tau_y) - 1, 0, self.N - 1))


def make_grid(N: int, bounds=(0.0, 2.0, -1.0, 1.0)) -> Grid2D:
    """Build a grid from ``N`` and ``(x_min, x_max, y_min, y_max)``."""
    x_min, x_max, y_min, y_max = bounds
    return Grid2D(N, x_min, x_max, y_min, y_max)


def entry_depth(mask: np.ndarray, row: int) -> int | None:
    """First column of ``row`` inside the support, or ``None``.

    Discrete counterpart of ``x_h = inf{x : (x, h) in Omega}``.
    """
    mask = np.asarray(mask, dtype=bool)
    if not 0 <= row < mask.shape[0]:
        raise ValueError(f"row {row} outside [0, {mask.shape[0]})")
    hits = np.flatnonzero(mask[row])
    return int(hits[0]) if hits.size else None


def entry_columns(mask: np.ndarray) -> np.ndarray:
    """Entry column for every row; ``-1`` for rows missing the support."""
    mask = np.asarray(mask, dtype=bool)
    first = np.argmax(mask, axis=1)
    return np.where(mask.any(axis=1), first, -1)


@dataclass(frozen=True)
class AdmissibleSection:
    """Discrete admissible-section quantities of a support mask.

    Attributes
    ----------
    entry : ndarray of int
        Entry column per row, ``-1`` where the row misses the support.
    in_Y : ndarray of bool, shape (N, N)
        ``in_Y[s, h]`` is true when row ``h`` belongs to ``Y_s``.
    s_minus, s_plus : int
        First column with nonempty ``Y_s`` and last admissible column.
    gamma : ndarray
        ``x_h`` (physical units) for rows in ``Y_{s+}``, NaN elsewhere.
    admissible : bool
        Whether the whole support equals its admissible section and the
        discrete slope condition on ``gamma`` holds.
    """

    entry: np.ndarray
    in_Y: np.ndarray
    s_minus: int
    s_plus: int
    gamma: np.ndarray
    admissible: bool
    column_admissible: np.ndarray = field(repr=False)

    def Y(self, s: int) -> np.ndarray:
        """Row indices of ``Y_s``."""
        return np.flatnonzero(self.in_Y[s])

    def y_low_row(self, s: int) -> int | None:
        """Row realising ``inf Y_s`` (the largest row index, lowest y)."""
        rows = self.Y(s)
        return int(rows[-1]) if rows.size else None


def _run_ends(mask: np.ndarray, entry: np.ndarray) -> np.ndarray:
    # last column of the contiguous run starting at the entry column
    N = mask.shape[1]
    ends = np.full(mask.shape[0], -1)
    for r in np.flatnonzero(entry >= 0):
        gaps = np.flatnonzero(~mask[r, entry[r]:])
        ends[r] = entry[r] + gaps[0] - 1 if gaps.size else N - 1
    return ends


def admissible_summary(mask: np.ndarray, grid: Grid2D) -> AdmissibleSection:
    """Compute ``s-``, ``Y_s``, ``s+``, ``gamma`` and the admissibility flag."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != grid.shape:
        raise ValueError(f"mask shape {mask.shape} does not match grid {grid.shape}")
    if not mask.any():
        raise ValueError("empty support mask")
    N = grid.N
    entry = entry_columns(mask)
    inside = entry >= 0
    cols = np.arange(N)
    in_Y = inside[None, :] & (entry[None, :] <= cols[:, None])
    s_minus = int(entry[inside].min())

    ends = _run_ends(mask, entry)
    # s is admissible iff every row entering by column s stays inside up to s
    column_admissible = np.array(
        [s >= s_minus and bool(np.all(ends[in_Y[s]] >= s)) for s in range(N)]
    )
    s_plus = int(np.flatnonzero(column_admissible).max())

    gamma = np.full(N, np.nan)
    rows = in_Y[s_plus]
    gamma[rows] = grid.xs[entry[rows]]

    slope_ok = True
    for s in range(s_minus + 1, s_plus):
        Ys = np.flatnonzero(in_Y[s])
        r_low = Ys[-1]
        if r_low - 1 >= 0 and in_Y[s, r_low - 1]:
            slope_ok &= bool(entry[r_low - 1] <= entry[r_low])
    fills = not mask[:, s_plus + 1:].any()
    return AdmissibleSection(
        entry=entry,
        in_Y=in_Y,
        s_minus=s_minus,
        s_plus=s_plus,
        gamma=gamma,
        admissible=bool(fills and slope_ok),
        column_admissible=column_admissible,
    )


def disk_mask(grid: Grid2D, center=(1.0, 0.0), radius: float = 0.85) -> np.ndarray:
    X, Y = grid.meshgrid()
    return (X - center[0]) ** 2 + (Y - center[1]) ** 2 <= radius**2
