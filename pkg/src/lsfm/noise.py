"""Scaled Poisson noise and the fused-image baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import MeasurementSet


@dataclass(frozen=True)
class NoiseSpec:
    """Scaled Poisson noise ``beta * Pois(p / beta)``; smaller ``beta`` means less noise."""

    beta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def scaled_poisson(p, beta, rng):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("Poisson means must be nonnegative")
    return beta * rng.poisson(p / beta)


def add_poisson_noise(meas: MeasurementSet, spec: NoiseSpec) -> MeasurementSet:
    """Replace every reading by a scaled Poisson draw and record the noise level."""
    rng = np.random.default_rng(spec.seed)
    left = scaled_poisson(meas.left, spec.beta, rng)
    right = scaled_poisson(meas.right, spec.beta, rng)
    clean = np.concatenate([meas.left.ravel(), meas.right.ravel()])
    noisy = np.concatenate([left.ravel(), right.ravel()])
    norm = np.linalg.norm(clean)
    level = float(np.linalg.norm(noisy - clean) / norm) if norm > 0 else 0.0
    return MeasurementSet(left, right, level)


def fuse(meas: MeasurementSet, crossfade: int = 0) -> np.ndarray:
    """Merge the two illuminations, each supplying the half it lights first.

    Columns ``0 .. ceil(N/2) - 1`` come from the left image and the rest from
    the right image.  ``crossfade > 0`` blends linearly over that many
    columns centred on the split.
    """
    N = meas.N
    split = (N + 1) // 2
    if crossfade <= 0:
        out = meas.right.copy()
        out[:, :split] = meas.left[:, :split]
        return out
    cols = np.arange(N)
    w_left = np.clip((split - 0.5 - cols) / crossfade + 0.5, 0.0, 1.0)
    return w_left * meas.left + (1 - w_left) * meas.right
