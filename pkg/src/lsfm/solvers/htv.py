"""Projected-restarted hybrid Krylov method with a reweighted TV penalty.

Each outer iteration freezes the TV reweighting at the current iterate,
turning the penalty into a weighted quadratic ``||L (x + d)||^2``.  The
correction ``d`` is sought in a Golub-Kahan subspace for the current
residual; the penalty weight is chosen on the projected problem by the
discrepancy principle.  The corrected iterate is projected onto ``x >= 0``
and the process restarts until ``||x||``, ``TV(x)`` or the penalty weight
stop changing.
"""
import numpy as np

from .base import Tracker, initial_iterate, project
from .tv import _shape, divergence_adjoint, gradient, tv, tv_weights


def _normal_tv(weights, shape):
    """Return ``v -> L^T L v`` for ``L = sqrt(w) * grad``."""

    def apply(v):
        img = v.reshape(shape, order="F")
        gx, gy = gradient(img)
        return divergence_adjoint(weights * gx, weights * gy).ravel(order="F")

    return apply


def _solve_projected(BtB, Btc, G, h, lam):
    M = BtB + lam * G
    rhs = Btc - lam * h
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(M, rhs, rcond=None)[0]


def _choose_weight(B, c, G, h, target, eta, iters=60):
    """Penalty weight whose projected residual ``||B y - c||`` equals ``target``.

    When even the unpenalized projected solution misses ``target`` (the
    model cannot explain the data to the noise level), the target is raised
    to ``eta`` times that smallest attainable residual, so the unexplained
    part is treated like noise and the penalty stays active.

    Returns ``(lam, y, residual)``; the largest trial weight when every
    weight meets the target.
    """
    BtB, Btc = B.T @ B, B.T @ c

    def resid(lam):
        y = _solve_projected(BtB, Btc, G, h, lam)
        return y, float(np.linalg.norm(B @ y - c))

    y0, r0 = resid(0.0)
    if not np.any(G):
        return 0.0, y0, r0
    target = max(target, eta * r0)
    scale = np.trace(BtB) / max(np.trace(G), 1e-300)
    lo, hi = -12.0, 12.0
    y_hi, r_hi = resid(scale * 10**hi)
    if r_hi <= target:
        return scale * 10**hi, y_hi, r_hi
    best = (0.0, y0, r0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        y, r = resid(scale * 10**mid)
        if r <= target:
            lo, best = mid, (scale * 10**mid, y, r)
        else:
            hi = mid
        if hi - lo < 1e-3:
            break
    return best


def _golub_kahan(A, r0, LtL, x, target, max_inner, stall):
    """Bidiagonalize until the unpenalized projected residual meets ``target``.

    The expansion also stops once a step lowers that residual by less than
    the relative amount ``stall``.

    Returns ``(V, B, beta1, G, h, breakdown)`` with ``G = V^T L^T L V`` and
    ``h = V^T L^T L x``.
    """
    beta1 = float(np.linalg.norm(r0))
    U = [r0 / beta1]
    V, M = [], []
    alphas, betas = [], []
    v = A.apply_adjoint(U[0])
    breakdown = False
    tiny = 1e-13
    prev = beta1
    for j in range(max_inner):
        for w in V:
            v -= (w @ v) * w
        alpha = float(np.linalg.norm(v))
        if alpha <= tiny * beta1 * (1 + (alphas[0] if alphas else 0)):
            breakdown = True
            break
        v = v / alpha
        V.append(v)
        M.append(LtL(v))
        alphas.append(alpha)
        u = A.apply(v) - alpha * U[-1]
        for w in U:
            u -= (w @ u) * w
        beta = float(np.linalg.norm(u))
        betas.append(beta)
        k = len(V)
        B = _bidiag(alphas, betas)
        c = np.zeros(k + 1)
        c[0] = beta1
        y = np.linalg.lstsq(B, c, rcond=None)[0]
        res = float(np.linalg.norm(B @ y - c))
        if res <= target or res >= (1 - stall) * prev:
            break
        prev = res
        if beta <= tiny * alpha:
            breakdown = True
            break
        U.append(u / beta)
        v = A.apply_adjoint(U[-1]) - beta * V[-1]
    if not V:
        return None
    Vm = np.column_stack(V)
    Mm = np.column_stack(M)
    G = Vm.T @ Mm
    G = 0.5 * (G + G.T)
    h = Mm.T @ x
    return Vm, _bidiag(alphas, betas), beta1, G, h, breakdown


def _bidiag(alphas, betas):
    k = len(alphas)
    B = np.zeros((k + 1, k))
    idx = np.arange(k)
    B[idx, idx] = alphas
    B[idx + 1, idx] = betas[:k]
    return B


def _rel_change(new, old):
    if old == 0:
        return 0.0 if new == 0 else np.inf
    return abs(new - old) / abs(old)


def solve_htv(system, cfg, grid=None):
    """Hybrid projected-restarted TV reconstruction.

    ``iterations`` counts outer (restart) iterations.  The result's
    ``extra`` carries the final penalty weight ``reg_weight`` and the total
    number of inner Krylov steps.
    """
    A, b = system.op, system.b
    n = A.shape[1]
    shape = _shape(n, grid if grid is not None else cfg.image_shape)
    track = Tracker(system, cfg)
    x = initial_iterate(system, cfg)
    eps = cfg.tv_epsilon * max(float(np.max(x)), 1e-300)
    bnorm = float(np.linalg.norm(b)) or 1.0
    target = cfg.threshold * bnorm
    r = b - A.apply(x)
    if track.record(x, np.linalg.norm(r)):
        return track.result(x, 0, "discrepancy", reg_weight=0.0, inner_steps=0)
    prev = (np.linalg.norm(x), tv(x, shape, eps)[0], None)
    inner_total = 0
    lam = 0.0
    for k in range(1, cfg.max_iter + 1):
        LtL = _normal_tv(tv_weights(x, shape, eps), shape)
        gk = _golub_kahan(A, r, LtL, x, target, cfg.max_inner, cfg.tol_outer)
        if gk is None:
            return track.result(x, k - 1, "stabilized", reg_weight=lam, inner_steps=inner_total)
        V, B, beta1, G, h, _ = gk
        inner_total += V.shape[1]
        c = np.zeros(B.shape[0])
        c[0] = beta1
        lam, y, _ = _choose_weight(B, c, G, h, target, cfg.eta)
        x = project(x + V @ y, cfg)
        r = b - A.apply(x)
        if track.record(x, np.linalg.norm(r)):
            return track.result(x, k, "discrepancy", reg_weight=lam, inner_steps=inner_total)
        cur = (np.linalg.norm(x), tv(x, shape, eps)[0], lam)
        changes = [_rel_change(cur[0], prev[0]), _rel_change(cur[1], prev[1])]
        if prev[2] is not None and lam > 0:
            changes.append(_rel_change(cur[2], prev[2]))
        prev = cur
        if k > 1 and min(changes) < cfg.tol_outer:
            return track.result(x, k, "stabilized", reg_weight=lam, inner_steps=inner_total)
    return track.result(x, cfg.max_iter, "max_iter", reg_weight=lam, inner_steps=inner_total)
