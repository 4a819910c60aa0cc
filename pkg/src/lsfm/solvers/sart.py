"""Simultaneous algebraic reconstruction technique with nonnegativity."""
import numpy as np

from .base import Tracker, initial_iterate, project


def _safe_inverse(v):
    with np.errstate(divide="ignore"):
        return np.where(v > 0, 1.0 / np.where(v > 0, v, 1.0), 0.0)


def solve_sart(system, cfg):
    """``x <- max(0, x + w V^-1 A^T W (b - Ax))`` with ``V``, ``W`` the column/row sums.

    Rows or columns that sum to zero are left out of the update.
    """
    A, b = system.op, system.b
    col, row = A.column_sums(), A.row_sums()
    if not np.any(col > 0):
        raise ValueError("SART needs an operator with at least one nonzero entry")
    inv_col, inv_row = _safe_inverse(col), _safe_inverse(row)
    omega = cfg.relaxation
    track = Tracker(system, cfg)
    x = initial_iterate(system, cfg)
    r = b - A.apply(x)
    if track.record(x, np.linalg.norm(r)):
        return track.result(x, 0, "discrepancy")
    for k in range(1, cfg.max_iter + 1):
        x = project(x + omega * inv_col * A.apply_adjoint(inv_row * r), cfg)
        r = b - A.apply(x)
        if track.record(x, np.linalg.norm(r)):
            return track.result(x, k, "discrepancy")
    return track.result(x, cfg.max_iter, "max_iter")
