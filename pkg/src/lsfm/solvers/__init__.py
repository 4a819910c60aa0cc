"""Iterative reconstruction algorithms with discrepancy-principle stopping."""
from .base import EXACT_FIT, SolverConfig, SolverResult, discrepancy_stop
from .fista import solve_fista
from .htv import solve_htv
from .mrnsd import solve_mrnsd
from .nnfcgls import solve_nnfcgls
from .sart import solve_sart
from .tv import tv

SOLVERS = {
    "mrnsd": solve_mrnsd,
    "sart": solve_sart,
    "fista": solve_fista,
    "nnfcgls": solve_nnfcgls,
    "htv": solve_htv,
}


def solve(name, system, cfg, grid=None):
    """Run the solver called ``name``."""
    try:
        fn = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
    if name == "htv":
        return fn(system, cfg, grid)
    return fn(system, cfg)


__all__ = ["EXACT_FIT", "SOLVERS", "SolverConfig", "SolverResult", "discrepancy_stop", "solve", "tv",
           "solve_mrnsd", "solve_sart", "solve_fista", "solve_nnfcgls", "solve_htv"]
