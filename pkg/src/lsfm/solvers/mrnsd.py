"""Modified residual norm steepest descent (Nagy & Strakos)."""
import math

import numpy as np

from .base import Tracker, initial_iterate, positivity_floor


def solve_mrnsd(system, cfg):
    """Steepest descent on ``||Ax - b||^2`` in the metric ``diag(x)``.

    Each step moves along ``d = -x * grad`` with the exact line-search step,
    cut back to the largest step that keeps ``x >= 0``.
    """
    A, b = system.op, system.b
    track = Tracker(system, cfg)
    x = np.maximum(initial_iterate(system, cfg), positivity_floor(b))
    if cfg.support is not None:
        x[~cfg.support] = 0.0
    r = b - A.apply(x)
    if track.record(x, np.linalg.norm(r)):
        return track.result(x, 0, "discrepancy")
    # q = A^T r is minus the gradient of ||Ax - b||^2 / 2
    q = A.apply_adjoint(r)
    for k in range(1, cfg.max_iter + 1):
        d = x * q
        u = A.apply(d)
        uu = u @ u
        qd = q @ d
        if uu == 0 or qd <= 0:
            return track.result(x, k - 1, "stabilized")
        theta = qd / uu
        shrinking = d < 0
        step = theta
        if shrinking.any():
            step = min(theta, float((-x[shrinking] / d[shrinking]).min()))
        x = x + step * d
        np.maximum(x, 0.0, out=x)
        r -= step * u
        q = A.apply_adjoint(r)
        if track.record(x, math.sqrt(r @ r)):
            return track.result(x, k, "discrepancy")
    return track.result(x, cfg.max_iter, "max_iter")
