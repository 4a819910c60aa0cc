"""Smoothed isotropic total variation with Neumann boundary."""
import numpy as np


def _shape(n, shape):
    if shape is None:
        side = int(round(np.sqrt(n)))
        if side * side != n:
            raise ValueError(f"cannot infer a square image from {n} unknowns")
        return (side, side)
    return tuple(getattr(shape, "shape", shape))


def gradient(img):
    """Forward differences; the last row/column difference is zero."""
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, :-1] = img[:, 1:] - img[:, :-1]
    gy[:-1, :] = img[1:, :] - img[:-1, :]
    return gx, gy


def divergence_adjoint(px, py):
    """``D^T`` applied to a field ``(px, py)`` (the negative divergence)."""
    out = np.zeros_like(px)
    out[:, :-1] -= px[:, :-1]
    out[:, 1:] += px[:, :-1]
    out[:-1, :] -= py[:-1, :]
    out[1:, :] += py[:-1, :]
    return out


def tv(x, shape=None, epsilon=1e-3):
    """``(value, gradient)`` of ``sum sqrt(dx^2 + dy^2 + epsilon^2)``.

    ``x`` is a first-index-fastest flattened image; ``shape`` may be a
    grid, a shape tuple, or ``None`` for square images.
    """
    x = np.asarray(x, dtype=float)
    shp = _shape(x.size, shape)
    img = x.reshape(shp, order="F")
    gx, gy = gradient(img)
    mag = np.sqrt(gx**2 + gy**2 + epsilon**2)
    grad = divergence_adjoint(gx / mag, gy / mag)
    return float(mag.sum()), grad.ravel(order="F")


def tv_weights(x, shape, epsilon):
    """Reweighting ``1 / sqrt(|grad x|^2 + epsilon^2)`` for the quadratic TV surrogate."""
    img = np.asarray(x, dtype=float).reshape(shape, order="F")
    gx, gy = gradient(img)
    return 1.0 / np.sqrt(gx**2 + gy**2 + epsilon**2)


class WeightedGradient:
    """Linear map ``d -> sqrt(w) * grad(d)`` stacked as a vector of length ``2n``."""

    def __init__(self, weights):
        self.sw = np.sqrt(weights)
        self.shape = weights.shape

    def apply(self, x):
        img = np.asarray(x).reshape(self.shape, order="F")
        gx, gy = gradient(img)
        return np.concatenate([(self.sw * gx).ravel(order="F"), (self.sw * gy).ravel(order="F")])
