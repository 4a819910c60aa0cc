"""Heat-equation view of one detection column.

For a fixed column ``s`` the attenuation-corrected readings of the left
illumination are values of a 1D heat flow: with

    f(y) = c mu(s, y) exp(-D(s, y))      (detection-weighted source)
    sigma(h) = alpha_h(s)^2 / 2           (half the beam variance)

the reading at height ``h`` equals ``U(sigma(h), h)`` where ``U`` solves
``U_t = U_yy`` with ``U(0, .) = f``.  This module evaluates those pieces
independently of the sparse forward model so the two can be compared.

``f`` is treated as piecewise constant on the pixel cells, which makes the
heat kernel integrals over each cell exact (error functions) and keeps the
check consistent with the cell-averaged beam profile used by the forward
model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import cumulative_attenuation
from .excitation import beam_profiles
from .grid import Grid2D, admissible_summary
from .kernels import cell_average
from .phantom import CoefficientMaps

# pad the line by this many heat-kernel standard deviations on each side
PAD_WIDTHS = 12.0


@dataclass
class HeatProfile:
    """Heat data for one column: ``f``, ``sigma``, ``g`` on the image rows.

    ``log_att[h]`` is ``int lambda`` along row ``h`` up to the column, so the
    raw reading is ``g * exp(-log_att)``.  ``in_Y`` flags the rows that reach
    the column inside the specimen.
    """

    s: int
    f: np.ndarray
    sigma: np.ndarray
    g: np.ndarray
    log_att: np.ndarray
    in_Y: np.ndarray

    @property
    def readings(self):
        return np.where(self.in_Y, self.g * np.exp(-np.where(self.in_Y, self.log_att, 0.0)), 0.0)


def _check_column(s, grid):
    if not 0 <= s < grid.N:
        raise ValueError(f"column {s} outside 0..{grid.N - 1}")


def sigma_profile(maps: CoefficientMaps, mask, s: int, grid: Grid2D) -> np.ndarray:
    """``sigma(h) = alpha_h(s)^2 / 2`` for every row ``h``; zero where the row misses column ``s``."""
    _check_column(s, grid)
    alpha2, _, _ = beam_profiles(maps, mask, grid)
    in_Y = admissible_summary(mask, grid).in_Y[s]
    return np.where(in_Y, 0.5 * alpha2[:, s], 0.0)


def source_profile(maps: CoefficientMaps, s: int, grid: Grid2D, weighted: bool = True) -> np.ndarray:
    """Initial condition ``f`` on the rows of column ``s``."""
    _check_column(s, grid)
    D = cumulative_attenuation(maps.a, grid, weighted)
    return maps.c * maps.mu[:, s] * np.exp(-D[:, s])


def gaussian_data(f, sigma_val: float, h: float, grid: Grid2D, ys=None) -> float:
    """``int f(r) (4 pi sigma)^(-1/2) exp(-(r - h)^2 / (4 sigma)) dr``.

    ``f`` holds cell values at the nodes ``ys`` (the image rows by default).
    ``sigma_val == 0`` returns the value of the cell containing ``h``.
    """
    if sigma_val < 0:
        raise ValueError("sigma must be nonnegative")
    f = np.asarray(f, dtype=float)
    ys = grid.ys if ys is None else np.asarray(ys)
    tau = grid.tau_y
    w = cell_average(ys - h, np.full(ys.shape, np.sqrt(2.0 * sigma_val)), tau)
    return float(np.sum(f * w) * tau)


def pad_count(t_max: float, grid: Grid2D) -> int:
    """Extra nodes on each side so the heat kernel at ``t_max`` has decayed."""
    return int(np.ceil(PAD_WIDTHS * np.sqrt(2.0 * max(t_max, 0.0)) / grid.tau_y)) + 1


def padded_nodes(grid: Grid2D, npad: int) -> np.ndarray:
    """Image row heights extended by ``npad`` nodes above and below (descending)."""
    idx = np.arange(-npad, grid.N + npad)
    return grid.y_max - (idx + 1) * grid.tau_y


def heat_evolve(f, t: float, grid: Grid2D, npad: int | None = None):
    """``U(t, .)`` on the padded line; returns ``(nodes, U)``.

    ``f`` is given on the image rows and extended by zero.  Each node value
    is the exact average of the heat kernel over the source cells, so
    ``U(0) = f`` and total mass is conserved up to the padding truncation.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.N,):
        raise ValueError(f"f must have length {grid.N}")
    npad = pad_count(t, grid) if npad is None else npad
    nodes = padded_nodes(grid, npad)
    src = nodes[npad:npad + grid.N]
    tau = grid.tau_y
    U = np.zeros(nodes.size)
    if t == 0:
        U[npad:npad + grid.N] = f
        return nodes, U
    sd = np.sqrt(2.0 * t)
    for i in np.flatnonzero(f):
        U += f[i] * cell_average(nodes - src[i], np.full(nodes.shape, sd), tau) * tau
    return nodes, U


def exterior_energy(f, rho, times, grid: Grid2D, npad: int | None = None) -> np.ndarray:
    """``I(t) = 1/2 sum_{y < rho(t)} U(t, y)^2 tau`` for each time.

    ``rho`` is an array aligned with ``times`` or a callable of ``t``.
    """
    times = np.asarray(times, dtype=float)
    rho_vals = np.array([rho(t) for t in times]) if callable(rho) else np.asarray(rho, dtype=float)
    if rho_vals.shape != times.shape:
        raise ValueError("rho and times must have the same length")
    npad = pad_count(float(times.max(initial=0.0)), grid) if npad is None else npad
    out = np.empty(times.size)
    for j, (t, r) in enumerate(zip(times, rho_vals)):
        nodes, U = heat_evolve(f, t, grid, npad)
        out[j] = 0.5 * np.sum(U[nodes < r] ** 2) * grid.tau_y
    return out


def heat_profile(maps: CoefficientMaps, mask, s: int, grid: Grid2D, weighted: bool = True) -> HeatProfile:
    """Assemble ``f``, ``sigma`` and ``g`` for column ``s`` of the left illumination."""
    _check_column(s, grid)
    alpha2, log_att, _ = beam_profiles(maps, mask, grid)
    in_Y = admissible_summary(mask, grid).in_Y[s]
    sigma = np.where(in_Y, 0.5 * alpha2[:, s], 0.0)
    f = source_profile(maps, s, grid, weighted)
    ys = grid.ys
    g = np.array([gaussian_data(f, sigma[h], ys[h], grid) if in_Y[h] else 0.0
                  for h in range(grid.N)])
    return HeatProfile(s, f, sigma, g, log_att[:, s].copy(), in_Y)


def sigma_properties(maps: CoefficientMaps, mask, s: int, grid: Grid2D, rtol: float = 1e-2) -> dict:
    """Discrete checks of the structural properties of ``sigma`` on column ``s``.

    The properties are expected on admissible columns (``s <= s_plus``).

    Returns a dict of booleans:

    ``nonnegative``
        ``sigma >= 0`` everywhere.
    ``vanishes_outside``
        ``sigma == 0`` on rows outside ``Y_s``.
    ``small_at_ends``
        at both ends of ``Y_s`` sigma is below ``rtol * max(sigma)``.
    ``flat_at_ends``
        the one-sided differences at the ends of ``Y_s`` are at most half
        the steepest difference inside it.
    ``increasing_start``
        reading ``Y_s`` upwards from its lower end, the first change of
        sigma is an increase and sigma does not decrease over the first
        eighth of the rows (pixelated entries make neighbouring rows tie).
    ``continuous``
        neighbouring samples inside ``Y_s`` differ by at most ``rtol``
        times ``max(sigma)`` plus a mesh-dependent slack.
    """
    sec = admissible_summary(mask, grid)
    sigma = sigma_profile(maps, mask, s, grid)
    rows = np.flatnonzero(sec.in_Y[s])
    res = {"nonnegative": bool(np.all(sigma >= 0))}
    outside = np.ones(grid.N, bool)
    outside[rows] = False
    res["vanishes_outside"] = bool(np.all(sigma[outside] == 0))
    if rows.size < 3 or not np.any(sigma[rows] > 0):
        # degenerate section at the tangent column: nothing to test
        res.update(small_at_ends=True, flat_at_ends=True, increasing_start=True, continuous=True)
        return res
    top = float(sigma[rows].max()) or 1.0
    ends = sigma[[rows[0], rows[-1]]]
    res["small_at_ends"] = bool(np.all(ends <= rtol * top))
    jumps = np.abs(np.diff(sigma[rows]))
    res["flat_at_ends"] = bool(max(jumps[0], jumps[-1]) <= 0.5 * jumps.max())
    # rows descend in y, so the lower end of Y_s is the last row
    up = np.diff(sigma[rows[::-1]])
    moving = np.flatnonzero(up)
    k = max(3, rows.size // 8)
    res["increasing_start"] = bool(moving.size and up[moving[0]] > 0 and np.all(up[:k] >= 0))
    res["continuous"] = bool(np.all(jumps <= max(rtol, 8.0 / np.sqrt(rows.size)) * top))
    return res
