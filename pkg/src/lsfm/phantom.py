"""Test densities and the coefficient maps of the forward model."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid2D, disk_mask

SHAPES = ("structured_disk", "uniform_disk", "empty_disk", "two_disks")
MODES = ("constant", "variable")


@dataclass(frozen=True)
class CoefficientMaps:
    """Fluorophore density and optical coefficients on the pixel grid.

    ``lam`` attenuates the excitation beam, ``a`` the emitted light on its
    way to the camera, and ``psi`` controls the angular spread of the beam.
    """

    mu: np.ndarray
    lam: np.ndarray
    a: np.ndarray
    psi: np.ndarray
    c: float = 1.0
    c_hat: float = 1.0
    c_tilde: float = 0.6

    def __post_init__(self):
        shape = self.mu.shape
        for name in ("lam", "a", "psi"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} shape {getattr(self, name).shape} != mu shape {shape}")
        for name in ("mu", "lam", "a", "psi"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def proportional(cls, mu, lam, c=1.0, c_hat=1.0, c_tilde=0.6):
        """Maps with ``a = c_hat * lam`` and ``psi = c_tilde * lam``."""
        lam = np.asarray(lam, dtype=float)
        return cls(
            mu=np.asarray(mu, dtype=float),
            lam=lam,
            a=c_hat * lam,
            psi=c_tilde * lam,
            c=c,
            c_hat=c_hat,
            c_tilde=c_tilde,
        )

    @classmethod
    def constant(cls, mask, lam_value, mu=None, c=1.0, c_hat=1.0, c_tilde=0.6):
        """Constant attenuation ``lam_value`` inside ``mask``, zero outside."""
        mask = np.asarray(mask, dtype=bool)
        mu = np.zeros(mask.shape) if mu is None else mu
        return cls.proportional(mu, lam_value * mask, c=c, c_hat=c_hat, c_tilde=c_tilde)

    def with_mu(self, mu) -> "CoefficientMaps":
        return replace(self, mu=np.asarray(mu, dtype=float))

    def mirrored(self) -> "CoefficientMaps":
        """Left-right mirror image of every map."""
        return replace(
            self,
            mu=self.mu[:, ::-1],
            lam=self.lam[:, ::-1],
            a=self.a[:, ::-1],
            psi=self.psi[:, ::-1],
        )


@dataclass(frozen=True)
class PhantomSpec:
    """Description of a synthetic specimen.

    ``mode='constant'`` uses ``lam = lambda_bg`` inside the support;
    ``mode='variable'`` uses ``lam = lambda_bg + lambda_slope * mu``.
    ``edge_width`` (a length) softens the feature boundaries of the
    structured disk with cubic ramps; 0 gives sharp edges.  ``puncta`` is
    the peak level of a few small bright spots added to the structured
    disk (0 leaves them out).
    """

    name: str = "structured_disk"
    mode: str = "constant"
    c: float = 1.0
    c_hat: float = 1.0
    c_tilde: float = 0.6
    lambda_bg: float = 1.1
    lambda_slope: float = 1.0
    amplitude: float = 1.0
    edge_width: float = 0.0
    puncta: float = 0.0
    radius: float = 0.85
    center: tuple = (1.0, 0.0)


def _step(signed_dist, width, centred=True):
    """Indicator of ``signed_dist <= 0`` with a cubic ramp of the given width.

    ``centred=False`` puts the whole ramp inside, so the result is exactly
    zero for ``signed_dist >= 0``.
    """
    if width <= 0:
        return (signed_dist <= 0).astype(float)
    t = np.clip((0.5 if centred else 0.0) - signed_dist / width, 0.0, 1.0)
    return t * t * (3 - 2 * t)


PUNCTA = [(0.5, 0.9), (0.47, 3.3), (0.2, 1.9), (0.72, 5.6), (0.6, 2.8), (0.12, 5.0)]
PUNCTA_SIZE = 0.035


def _structured_density(grid, center, radius, edge=0.0, puncta=0.0):
    X, Y = grid.meshgrid()
    dx, dy = X - center[0], Y - center[1]
    rr = np.hypot(dx, dy)
    r = rr / radius
    theta = np.arctan2(dy, dx)

    def paint(base, value, inside):
        return base * (1 - inside) + value * inside

    mu = np.full(rr.shape, 0.35)
    # membrane-like ring with a mild angular modulation
    ring = _step(np.abs(rr - 0.65 * radius) - 0.07 * radius, edge)
    mu = paint(mu, 0.85 + 0.15 * np.cos(3 * theta), ring)
    mu = paint(mu, 0.8, _step(rr - 0.16 * radius, edge))
    spots = [(0.38, 0.3, 0.08, 0.9), (0.38, 2.4, 0.07, 0.7), (0.3, 4.2, 0.09, 1.0),
             (0.85, 1.2, 0.06, 0.6), (0.86, 5.0, 0.07, 0.75)]
    for rad, ang, size, level in spots:
        cx = center[0] + rad * radius * np.cos(ang)
        cy = center[1] + rad * radius * np.sin(ang)
        mu = paint(mu, level, _step(np.hypot(X - cx, Y - cy) - size * radius, edge))
    if puncta > 0:
        for rad, ang in PUNCTA:
            cx = center[0] + rad * radius * np.cos(ang)
            cy = center[1] + rad * radius * np.sin(ang)
            dist = np.hypot(X - cx, Y - cy) - PUNCTA_SIZE * radius
            mu = paint(mu, puncta, _step(dist, min(edge, PUNCTA_SIZE * radius)))
    # taper to zero at the rim so the density vanishes outside the support
    return mu * _step(rr - radius, edge, centred=False)


def make_phantom(spec: PhantomSpec, grid: Grid2D):
    """Build ``(CoefficientMaps, support_mask)`` for a catalogue entry."""
    if spec.name not in SHAPES:
        raise ValueError(f"unknown phantom {spec.name!r}; choose from {SHAPES}")
    if spec.mode not in MODES:
        raise ValueError(f"unknown attenuation mode {spec.mode!r}; choose from {MODES}")

    if spec.name == "two_disks":
        r = spec.radius / 2
        mask = disk_mask(grid, (spec.center[0] - 1.1 * r, spec.center[1]), r) | disk_mask(
            grid, (spec.center[0] + 1.1 * r, spec.center[1]), r
        )
        mu = 0.6 * mask
    else:
        mask = disk_mask(grid, spec.center, spec.radius)
        if spec.name == "structured_disk":
            mu = _structured_density(grid, spec.center, spec.radius, spec.edge_width, spec.puncta)
        elif spec.name == "uniform_disk":
            mu = 0.6 * mask
        else:
            mu = np.zeros(grid.shape)
    mu = spec.amplitude * np.where(mask, mu, 0.0)

    if spec.mode == "constant":
        lam = spec.lambda_bg * mask
    else:
        lam = np.where(mask, spec.lambda_bg + spec.lambda_slope * mu, 0.0)
    maps = CoefficientMaps.proportional(
        mu, lam, c=spec.c, c_hat=spec.c_hat, c_tilde=spec.c_tilde
    )
    return maps, mask
