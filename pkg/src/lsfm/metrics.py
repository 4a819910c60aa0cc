"""Reconstruction quality measures."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

K1, K2 = 0.01, 0.03
WIN_SIZE, WIN_SIGMA = 11, 1.5


def nre(x_ref, x) -> float:
    """Relative 2-norm error ``||x_ref - x|| / ||x_ref||``."""
    x_ref = np.asarray(x_ref, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    if x_ref.shape != x.shape:
        raise ValueError(f"shape mismatch: {x_ref.shape} vs {x.shape}")
    ref_norm = np.linalg.norm(x_ref)
    if ref_norm == 0:
        raise ValueError("relative error undefined for a zero reference")
    return float(np.linalg.norm(x_ref - x) / ref_norm)


def _gaussian_window(size=WIN_SIZE, sigma=WIN_SIGMA):
    r = np.arange(size) - (size - 1) / 2
    w = np.exp(-(r**2) / (2 * sigma**2))
    return w / w.sum()


def _filter_valid(img, w):
    # separable weighted mean, keeping only windows fully inside the image
    pad = (w.size - 1) // 2
    out = correlate1d(correlate1d(img, w, axis=0, mode="constant"), w, axis=1, mode="constant")
    return out[pad:-pad, pad:-pad]


def ssim_map(x_ref, x, data_range=None):
    x_ref = np.asarray(x_ref, dtype=float)
    x = np.asarray(x, dtype=float)
    if x_ref.shape != x.shape:
        raise ValueError(f"shape mismatch: {x_ref.shape} vs {x.shape}")
    if min(x_ref.shape) < WIN_SIZE:
        raise ValueError(f"images must be at least {WIN_SIZE} pixels per side")
    if data_range is None:
        data_range = float(x_ref.max() - x_ref.min())
    if not data_range > 0:
        raise ValueError("SSIM needs a reference with nonzero dynamic range")
    w = _gaussian_window()
    mu_a, mu_b = _filter_valid(x_ref, w), _filter_valid(x, w)
    s_aa = _filter_valid(x_ref * x_ref, w) - mu_a**2
    s_bb = _filter_valid(x * x, w) - mu_b**2
    s_ab = _filter_valid(x_ref * x, w) - mu_a * mu_b
    C1, C2 = (K1 * data_range) ** 2, (K2 * data_range) ** 2
    return ((2 * mu_a * mu_b + C1) * (2 * s_ab + C2)) / (
        (mu_a**2 + mu_b**2 + C1) * (s_aa + s_bb + C2)
    )


def ssim(x_ref, x, grid_or_shape=None, data_range=None) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03.

    Vectors are reshaped to images using ``grid_or_shape`` (a grid, a shape
    tuple, or ``None`` for square images) with first-index-fastest order.
    The dynamic range defaults to ``max(x_ref) - min(x_ref)``.
    """
    x_ref, x = np.asarray(x_ref, dtype=float), np.asarray(x, dtype=float)
    if x_ref.ndim == 1:
        if grid_or_shape is None:
            n = int(round(np.sqrt(x_ref.size)))
            shape = (n, n)
        else:
            shape = getattr(grid_or_shape, "shape", grid_or_shape)
        x_ref = x_ref.reshape(shape, order="F")
        x = x.reshape(shape, order="F")
    return float(np.mean(ssim_map(x_ref, x, data_range)))
