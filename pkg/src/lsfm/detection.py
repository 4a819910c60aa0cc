"""Collimated camera measurements along image columns.

The camera sits above row 0 and only collects photons travelling straight
up the columns, so a pixel's emission reaches it attenuated by the partial
column sum of ``a`` between the pixel and the top edge.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .excitation import DEFAULT_CUTOFF, ExcitationField, excitation_field, side_profiles
from . import kernels
from .grid import Grid2D
from .phantom import CoefficientMaps


@dataclass(frozen=True)
class MeasurementSet:
    """Camera readings ``p_{h_l}(s_k)`` for left and right illumination.

    ``left[l, k]`` is the reading at pixel ``k`` for the beam at row ``l``;
    ``right`` is stored in the same (unmirrored) frame.
    """

    left: np.ndarray
    right: np.ndarray
    noise_level: float = 0.0

    def __post_init__(self):
        if self.left.shape != self.right.shape:
            raise ValueError(f"left {self.left.shape} and right {self.right.shape} differ")

    @property
    def N(self) -> int:
        return self.left.shape[0]


def cumulative_attenuation(a, grid: Grid2D | None = None, weighted: bool = True) -> np.ndarray:
    """``D[i, k] = sum_{z <= i} a[z, k] * tau`` (inclusive partial column sums)."""
    a = np.asarray(a, dtype=float)
    weight = grid.tau_y if (weighted and grid is not None) else 1.0
    return np.cumsum(a, axis=0) * weight


def detection_weight(maps: CoefficientMaps, grid: Grid2D, weighted: bool = True) -> np.ndarray:
    """Per-pixel factor ``c * exp(-D) * tau`` applied to the emitted light."""
    D = cumulative_attenuation(maps.a, grid, weighted)
    quad = grid.tau_y if weighted else 1.0
    return np.ascontiguousarray(maps.c * np.exp(-D) * quad)


def measure_line(mu, field: ExcitationField, D, k: int, grid: Grid2D, c: float = 1.0,
                 weighted: bool = True) -> float:
    """Reading at camera pixel ``k``: ``c * sum_i mu v exp(-D) tau`` down column ``k``."""
    quad = grid.tau_y if weighted else 1.0
    col = np.asarray(mu)[:, k] * field.v[:, k] * np.exp(-np.asarray(D)[:, k])
    return float(c * np.sum(col) * quad)


def _side_readings(mu, sigma, att, weight, grid, cutoff):
    N = grid.N
    out = np.zeros((N, N))
    emit = mu * weight
    for l in range(N):
        if np.any(att[l] > 0):
            v = kernels.field_values(sigma[l], att[l], l, N, grid.tau_y, cutoff)
            out[l] = np.sum(emit * v, axis=0)
    return out


def measure_all(maps: CoefficientMaps, mask, grid: Grid2D, mu=None, weighted: bool = True,
                cutoff: float = DEFAULT_CUTOFF, workers: int | None = None) -> MeasurementSet:
    """Readings for all ``N`` heights from both sides.

    ``mu`` overrides ``maps.mu`` (the optical coefficients stay the same).
    ``workers > 1`` evaluates the two sides in parallel threads.
    """
    mu = maps.mu if mu is None else np.asarray(mu, dtype=float)
    if mu.shape != grid.shape:
        raise ValueError(f"density shape {mu.shape} does not match grid {grid.shape}")
    weight = detection_weight(maps, grid, weighted)

    def run(side):
        sigma, att = side_profiles(maps, mask, grid, side)
        return _side_readings(mu, sigma, att, weight, grid, cutoff)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            left, right = pool.map(run, ("left", "right"))
    else:
        left, right = run("left"), run("right")
    return MeasurementSet(left, right)


def measure_height(maps: CoefficientMaps, mask, h_index: int, side: str, grid: Grid2D,
                   weighted: bool = True) -> np.ndarray:
    """Readings for one excitation (all camera pixels), via ``excitation_field``."""
    field = excitation_field(maps, mask, h_index, side, grid)
    D = cumulative_attenuation(maps.a, grid, weighted)
    return np.array([measure_line(maps.mu, field, D, k, grid, maps.c, weighted)
                     for k in range(grid.N)])
