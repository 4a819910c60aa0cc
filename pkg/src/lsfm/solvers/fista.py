"""FISTA for ``min ||Ax - b||^2`` over the nonnegative orthant."""
import numpy as np

from .base import Tracker, initial_iterate, project


def lipschitz_estimate(op, iters=20, rtol=1e-4):
    """Largest eigenvalue of ``A^T A`` by power iteration from a constant start."""
    n = op.shape[1]
    v = np.ones(n) / np.sqrt(n)
    est = 0.0
    for _ in range(iters):
        w = op.apply_adjoint(op.apply(v))
        new = float(np.linalg.norm(w))
        if new == 0:
            return 0.0
        v = w / new
        if est > 0 and abs(new - est) <= rtol * new:
            return new
        est = new
    return est


def solve_fista(system, cfg):
    """Accelerated projected gradient with function-value restart.

    When an accelerated step raises the data misfit, the momentum is reset
    and a plain projected gradient step from the last iterate is taken
    instead, so the recorded misfit never increases.
    """
    A, b = system.op, system.b
    L = lipschitz_estimate(A)
    if L == 0:
        raise ValueError("FISTA: operator is zero (Lipschitz estimate 0)")
    track = Tracker(system, cfg)
    x = initial_iterate(system, cfg)
    Ax = A.apply(x)
    f = float(np.sum((Ax - b) ** 2))
    if track.record(x, np.sqrt(f)):
        return track.result(x, 0, "discrepancy", lipschitz=L)
    y, Ay, t = x, Ax, 1.0
    restarts = 0
    for k in range(1, cfg.max_iter + 1):
        x_new = project(y - A.apply_adjoint(Ay - b) / L, cfg)
        Ax_new = A.apply(x_new)
        f_new = float(np.sum((Ax_new - b) ** 2))
        if f_new > f:
            restarts += 1
            t = 1.0
            x_new = project(x - A.apply_adjoint(Ax - b) / L, cfg)
            Ax_new = A.apply(x_new)
            f_new = float(np.sum((Ax_new - b) ** 2))
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        mom = (t - 1) / t_new
        y = x_new + mom * (x_new - x)
        Ay = Ax_new + mom * (Ax_new - Ax)
        x, Ax, f, t = x_new, Ax_new, f_new, t_new
        if track.record(x, np.sqrt(f)):
            return track.result(x, k, "discrepancy", lipschitz=L, restarts=restarts)
    return track.result(x, cfg.max_iter, "max_iter", lipschitz=L, restarts=restarts)
