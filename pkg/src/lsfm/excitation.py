"""Closed-form Fermi pencil-beam excitation.

Inside the object the beam entering at ``(x_h, h)`` has total intensity

    v_h(x, y) = exp(-int_{x_h}^x lambda) * N(y; h, alpha_h(x)^2)

with ``alpha_h(x)^2 = int_{x_h}^x (x - t)^2 psi(t, h) dt``.  Path integrals
are left Riemann sums over pixels with weight ``tau``.  Pixel values of the
discrete field are averages of the Gaussian over each pixel's y-cell, which
keeps every column's ``tau``-weighted mass exact for any width, including
the zero width at the entry column.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from . import kernels
from .grid import Grid2D, entry_columns
from .phantom import CoefficientMaps

DEFAULT_CUTOFF = 6.0
SIDES = ("left", "right")


class SingularStateError(ArithmeticError):
    """The angular covariance of the beam is degenerate."""


def _check_range(entry, x):
    if x < entry:
        raise ValueError(f"column {x} lies before the entry column {entry}")


def moments(psi_row, entry: int, x: int, grid: Grid2D):
    """``(E0, E1, E2)`` at column ``x`` for a beam entering at column ``entry``.

    ``E_k = sum_{m=entry}^{x-1} (x_m - x_entry)^k psi_m tau``.
    """
    _check_range(entry, x)
    tau = grid.tau
    psi = np.asarray(psi_row, dtype=float)[entry:x]
    depth = tau * np.arange(psi.size)
    return tuple(float(np.sum(depth**k * psi) * tau) for k in range(3))


def alpha_sq(psi_row, entry: int, x: int, grid: Grid2D) -> float:
    """Beam variance ``sum_{m=entry}^{x-1} (x - x_m)^2 psi_m tau``."""
    _check_range(entry, x)
    tau = grid.tau
    psi = np.asarray(psi_row, dtype=float)[entry:x]
    lever = tau * (x - np.arange(entry, x))
    return float(np.sum(lever**2 * psi) * tau)


def beam_profiles(maps: CoefficientMaps, mask, grid: Grid2D):
    """Variance and path attenuation for every left-side excitation height.

    Returns
    -------
    alpha2 : ndarray (N, N)
        ``alpha2[l, k]`` is the beam variance at column ``k`` for the beam at
        row ``l``; zero before the entry column.
    log_att : ndarray (N, N)
        ``int lambda`` from the entry column to column ``k``; ``inf`` before
        the entry column and for rows missing the support.
    entry : ndarray of int
        Entry column per row, ``-1`` for rows missing the support.
    """
    N = grid.N
    tau = grid.tau
    entry = entry_columns(mask)
    cols = np.arange(N)[None, :]
    e = entry[:, None]
    reached = (entry[:, None] >= 0) & (cols >= e)

    depth = np.where(reached, (cols - e) * tau, 0.0)
    psi = np.where(reached, maps.psi, 0.0)
    lam = np.where(reached, maps.lam, 0.0)

    def excl_cumsum(arr):
        out = np.zeros_like(arr)
        np.cumsum(arr[:, :-1], axis=1, out=out[:, 1:])
        return out * tau

    E0 = excl_cumsum(psi)
    E1 = excl_cumsum(depth * psi)
    E2 = excl_cumsum(depth**2 * psi)
    alpha2 = np.maximum(E2 - 2 * depth * E1 + depth**2 * E0, 0.0)
    log_att = np.where(reached, excl_cumsum(lam), np.inf)
    return np.where(reached, alpha2, 0.0), log_att, entry


def side_profiles(maps: CoefficientMaps, mask, grid: Grid2D, side: str):
    """``(sigma, att)`` arrays for one illumination side in the image frame.

    ``sigma[l, k]`` is the beam standard deviation and ``att[l, k]`` the
    surviving excitation fraction (zero where the beam has not entered).
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    mask = np.asarray(mask, dtype=bool)
    if side == "right":
        alpha2, log_att, _ = beam_profiles(maps.mirrored(), mask[:, ::-1], grid)
        alpha2, log_att = alpha2[:, ::-1], log_att[:, ::-1]
    else:
        alpha2, log_att, _ = beam_profiles(maps, mask, grid)
    sigma = np.ascontiguousarray(np.sqrt(alpha2))
    att = np.ascontiguousarray(np.exp(-log_att))
    return sigma, att


@dataclass(frozen=True)
class ExcitationField:
    """Beam intensity for one excitation height and side."""

    v: np.ndarray
    h_index: int
    side: str
    entry_col: int | None
    log_attenuation: np.ndarray
    alpha2: np.ndarray


def excitation_field(
    maps: CoefficientMaps,
    mask,
    h_index: int,
    side: str,
    grid: Grid2D,
    cutoff: float = DEFAULT_CUTOFF,
) -> ExcitationField:
    """Discrete intensity ``v_h`` on the whole grid for the beam at row ``h_index``.

    The right side is obtained by mirroring every map, solving from the left
    and mirroring back.
    """
    N = grid.N
    if not 0 <= h_index < N:
        raise ValueError(f"h_index {h_index} outside [0, {N})")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    mask = np.asarray(mask, dtype=bool)
    if side == "right":
        left = excitation_field(maps.mirrored(), mask[:, ::-1], h_index, "left", grid, cutoff)
        entry = None if left.entry_col is None else N - 1 - left.entry_col
        return ExcitationField(
            v=left.v[:, ::-1],
            h_index=h_index,
            side="right",
            entry_col=entry,
            log_attenuation=left.log_attenuation[::-1],
            alpha2=left.alpha2[::-1],
        )

    row = {"mu": maps.mu[h_index:h_index + 1], "psi": maps.psi[h_index:h_index + 1],
           "lam": maps.lam[h_index:h_index + 1]}
    sub = CoefficientMaps(mu=row["mu"], lam=row["lam"], a=row["lam"], psi=row["psi"])
    alpha2, log_att, entry = beam_profiles(sub, mask[h_index:h_index + 1], grid)
    alpha2, log_att = alpha2[0], log_att[0]
    e = int(entry[0])
    if e < 0:
        return ExcitationField(np.zeros(grid.shape), h_index, "left", None, log_att, alpha2)
    sigma = np.ascontiguousarray(np.sqrt(alpha2))
    att = np.ascontiguousarray(np.exp(-log_att))
    v = kernels.field_values(sigma, att, h_index, N, grid.tau_y, cutoff)
    return ExcitationField(v, h_index, "left", e, log_att, alpha2)


def line_mass(field: ExcitationField, grid: Grid2D) -> np.ndarray:
    """Column mass of the beam on the whole line ``y in R``.

    The image only covers ``N`` rows; a wide beam near the top or bottom
    edge sends part of its light past them.  That part is added back from
    the closed form, so the result is ``exp(-int lambda)`` wherever the beam
    has entered.
    """
    v = field.v
    in_image = v.sum(axis=0) * grid.tau_y
    h = grid.ys[field.h_index]
    top = grid.ys[0] + 0.5 * grid.tau_y
    bottom = grid.ys[-1] - 0.5 * grid.tau_y
    sigma = np.sqrt(field.alpha2)
    with np.errstate(divide="ignore", invalid="ignore"):
        outside = np.where(sigma > 0, ndtr((h - top) / sigma) + ndtr((bottom - h) / sigma), 0.0)
    return in_image + np.exp(-field.log_attenuation) * outside


def marginal_intensity(alpha2, log_att, y, h):
    """Pointwise closed form ``exp(-log_att) N(y; h, alpha2)`` (``alpha2 > 0``)."""
    alpha2 = np.asarray(alpha2, dtype=float)
    return np.exp(-log_att) * np.exp(-((y - h) ** 2) / (2 * alpha2)) / np.sqrt(2 * np.pi * alpha2)


def _fz(E0, E1, E2, depth, dy, omega):
    det = E0 * E2 - E1**2
    if not det > 0:
        raise SingularStateError(f"degenerate beam covariance (det = {det:g})")
    z1 = dy - omega * depth
    z2 = omega
    quad = (E0 * z1**2 + 2 * E1 * z1 * z2 + E2 * z2**2) / det
    return np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(det))


def angular_intensity(maps: CoefficientMaps, mask, h_index: int, x_index: int, y, omega,
                      grid: Grid2D):
    """Angular-resolved intensity ``u_h(x, y, omega)`` at a pixel column.

    ``y`` is a physical coordinate and ``omega`` a (small) angle; both may be
    arrays.  Raises ``SingularStateError`` at columns where the angular
    covariance is still degenerate (the first columns past entry).
    """
    entry = entry_columns(np.asarray(mask, dtype=bool)[h_index:h_index + 1])[0]
    if entry < 0:
        raise ValueError(f"row {h_index} does not meet the support")
    psi_row = maps.psi[h_index]
    E0, E1, E2 = moments(psi_row, int(entry), x_index, grid)
    depth = (x_index - entry) * grid.tau
    log_att = float(np.sum(maps.lam[h_index, entry:x_index]) * grid.tau)
    h = grid.ys[h_index]
    return np.exp(-log_att) * _fz(E0, E1, E2, depth, np.asarray(y) - h, np.asarray(omega))


def excited_source(field: ExcitationField, maps: CoefficientMaps) -> np.ndarray:
    """Excited fluorophores ``w = c * v * mu``."""
    if field.v.shape != maps.mu.shape:
        raise ValueError(f"field shape {field.v.shape} != density shape {maps.mu.shape}")
    return maps.c * field.v * maps.mu


class PencilBeam:
    """Closed-form beam for continuous coefficient profiles along one row.

    Parameters
    ----------
    psi, lam : callable
        Diffusion and attenuation as functions of ``x`` along the row.
    x_entry, h : float
        Entry point ``(x_entry, h)`` of the beam.
    """

    def __init__(self, psi, lam, x_entry: float, h: float):
        self.psi = psi
        self.lam = lam
        self.x_entry = x_entry
        self.h = h

    def moments(self, x):
        x0 = self.x_entry
        return tuple(
            integrate.quad(lambda t: (t - x0) ** k * self.psi(t), x0, x, epsabs=1e-15, epsrel=1e-13)[0]
            for k in range(3)
        )

    def alpha_sq(self, x):
        return integrate.quad(lambda t: (x - t) ** 2 * self.psi(t), self.x_entry, x,
                              epsabs=1e-15, epsrel=1e-13)[0]

    def log_attenuation(self, x):
        return integrate.quad(self.lam, self.x_entry, x, epsabs=1e-15, epsrel=1e-13)[0]

    def u(self, x, y, omega):
        E0, E1, E2 = self.moments(x)
        fz = _fz(E0, E1, E2, x - self.x_entry, np.asarray(y) - self.h, np.asarray(omega))
        return np.exp(-self.log_attenuation(x)) * fz

    def v(self, x, y):
        return marginal_intensity(self.alpha_sq(x), self.log_attenuation(x), y, self.h)

    def fermi_residual(self, x, y, omega, step, diffusion_factor=0.5):
        """Central-difference residual of ``d_x + w d_y + lam - f psi d_w^2`` on ``u``.

        The closed form solves the operator with ``diffusion_factor = 1/2``.
        """
        d = step
        u0 = self.u(x, y, omega)
        ux = (self.u(x + d, y, omega) - self.u(x - d, y, omega)) / (2 * d)
        uy = (self.u(x, y + d, omega) - self.u(x, y - d, omega)) / (2 * d)
        uww = (self.u(x, y, omega + d) - 2 * u0 + self.u(x, y, omega - d)) / d**2
        return ux + omega * uy + self.lam(x) * u0 - diffusion_factor * self.psi(x) * uww
