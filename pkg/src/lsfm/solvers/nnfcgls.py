"""Nonnegative flexible CGLS.

Search directions are the gradient scaled by ``diag(x_k)``, a
preconditioner that changes every iteration, so each new direction is made
``A``-orthogonal to the stored previous ones (flexible CG).  A step that
leaves the orthant is projected back and the recurrence restarts.
"""
import numpy as np

from .base import Tracker, initial_iterate, positivity_floor, project


def solve_nnfcgls(system, cfg):
    A, b = system.op, system.b
    floor = positivity_floor(b)
    active = 1.0 if cfg.support is None else cfg.support.astype(float)
    track = Tracker(system, cfg)
    x = initial_iterate(system, cfg)
    r = b - A.apply(x)
    if track.record(x, np.linalg.norm(r)):
        return track.result(x, 0, "discrepancy")
    history = []
    restarts = 0
    failed = 0
    for k in range(1, cfg.max_iter + 1):
        g = A.apply_adjoint(r)
        z = active * np.maximum(x, floor) * g
        q = A.apply(z)
        for p_j, q_j, qq_j in history:
            coef = (q @ q_j) / qq_j
            z = z - coef * p_j
            q = q - coef * q_j
        qq = q @ q
        if not qq > 0:
            if history:
                history.clear()
                restarts += 1
                failed += 1
                if failed > 2:
                    return track.result(x, k - 1, "stabilized", restarts=restarts)
                continue
            return track.result(x, k - 1, "stabilized", restarts=restarts)
        failed = 0
        alpha = (q @ r) / qq
        x_new = x + alpha * z
        if np.min(x_new) < 0:
            x = project(x_new, cfg)
            r = b - A.apply(x)
            history.clear()
            restarts += 1
        else:
            x = x_new
            r = r - alpha * q
            history.append((z, q, qq))
            if len(history) > cfg.krylov_memory:
                history.pop(0)
        if track.record(x, np.linalg.norm(r)):
            return track.result(x, k, "discrepancy", restarts=restarts)
    return track.result(x, cfg.max_iter, "max_iter", restarts=restarts)
