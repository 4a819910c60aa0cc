"""Configuration, results and stopping rule shared by all solvers."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..metrics import nre, ssim

# float floor for the exact-fit test when the noise level is zero
EXACT_FIT = 1e-14


@dataclass
class SolverConfig:
    """Iteration controls.

    ``reg_weight`` is never set by hand: the TV solver picks it by the
    discrepancy principle.  ``tv_epsilon`` is relative to ``max(x0)``.
    ``support`` (boolean, length n) optionally restricts the feasible set
    to nonnegative vectors vanishing outside the support.
    """

    eta: float = 1.01
    noise_level: float = 0.0
    max_iter: int = 500
    x0: np.ndarray | None = None
    tol_outer: float = 1e-3
    tv_epsilon: float = 1e-2
    relaxation: float = 1.9
    max_inner: int = 200
    krylov_memory: int = 30
    reference: np.ndarray | None = None
    image_shape: tuple | None = None
    track_ssim: bool = False
    support: np.ndarray | None = None

    def __post_init__(self):
        if not self.eta > 1:
            raise ValueError(f"eta must exceed 1, got {self.eta}")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.support is not None:
            # a 2D mask is flattened in the same column-major order as images
            self.support = np.asarray(self.support, dtype=bool).ravel(order="F")

    @property
    def threshold(self) -> float:
        return max(self.eta * self.noise_level, EXACT_FIT)


@dataclass
class SolverResult:
    x: np.ndarray
    iterations: int
    residual_history: list
    stop_reason: str
    wall_time: float
    nre: float | None = None
    ssim: float | None = None
    nre_history: list = field(default_factory=list)
    ssim_history: list = field(default_factory=list)
    time_history: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def log_rows(self):
        """``(iteration, residual_rel, nre, ssim, wall_time)`` per recorded iterate."""
        n = len(self.residual_history)
        pad = lambda seq: list(seq) + [None] * (n - len(seq))  # noqa: E731
        return list(zip(range(n), self.residual_history, pad(self.nre_history),
                        pad(self.ssim_history), pad(self.time_history)))


def discrepancy_stop(residual_rel: float, cfg: SolverConfig) -> bool:
    """True once ``||b - Ax|| / ||b|| <= eta * noise_level``."""
    return residual_rel <= cfg.threshold


def project(x, cfg: SolverConfig) -> np.ndarray:
    """Projection onto the feasible set: ``x >= 0`` and zero off the support."""
    x = np.maximum(x, 0.0)
    if cfg.support is not None:
        x[~cfg.support] = 0.0
    return x


def positivity_floor(b) -> float:
    return 1e-8 * float(np.max(np.abs(b))) if np.size(b) else 0.0


def default_start(op, b, support=None) -> np.ndarray:
    """Best constant image (on the support) in the least-squares sense, floored at zero."""
    n = op.shape[1]
    ones = np.ones(n) if support is None else support.astype(float)
    A1 = op.apply(ones)
    denom = A1 @ A1
    s = (A1 @ b) / denom if denom > 0 else 0.0
    return max(s, 0.0) * ones


def initial_iterate(system, cfg) -> np.ndarray:
    n = system.op.shape[1]
    if cfg.support is not None and cfg.support.shape != (n,):
        raise ValueError(f"support has shape {cfg.support.shape}, expected ({n},)")
    x0 = default_start(system.op, system.b, cfg.support) if cfg.x0 is None else np.array(cfg.x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({n},)")
    return project(x0, cfg)


class Tracker:
    """Records residuals and metrics and applies the stopping rule."""

    def __init__(self, system, cfg: SolverConfig):
        self.cfg = cfg
        self.bnorm = float(np.linalg.norm(system.b)) or 1.0
        self.residuals = []
        self.nres = []
        self.ssims = []
        self.times = []
        self.start = time.perf_counter()

    def record(self, x, resid_norm) -> bool:
        """Log the iterate; return True when the discrepancy principle is met."""
        rel = float(resid_norm) / self.bnorm
        self.residuals.append(rel)
        ref = self.cfg.reference
        if ref is not None:
            self.nres.append(nre(ref, x))
            if self.cfg.track_ssim:
                self.ssims.append(ssim(ref, x, self.cfg.image_shape))
        self.times.append(time.perf_counter() - self.start)
        return discrepancy_stop(rel, self.cfg)

    def result(self, x, iterations, reason, **extra) -> SolverResult:
        ref = self.cfg.reference
        final_nre = final_ssim = None
        if ref is not None:
            final_nre = nre(ref, x)
            try:
                final_ssim = ssim(ref, x, self.cfg.image_shape)
            except ValueError:
                final_ssim = None
        return SolverResult(
            x=x,
            iterations=iterations,
            residual_history=self.residuals,
            stop_reason=reason,
            wall_time=time.perf_counter() - self.start,
            nre=final_nre,
            ssim=final_ssim,
            nre_history=self.nres,
            ssim_history=self.ssims,
            time_history=self.times,
            extra=extra,
        )
