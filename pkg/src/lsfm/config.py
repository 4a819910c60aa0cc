"""Flat ``key = value`` experiment configuration files.

Lines are ``key = value``; ``#`` starts a comment; blank lines are ignored.
Solver settings may be overridden per algorithm with a dotted key such as
``htv.max_iter = 60``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .phantom import MODES, SHAPES

SOLVER_NAMES = ("mrnsd", "sart", "fista", "nnfcgls", "htv")
SOLVER_KEYS = {
    "eta": float,
    "max_iter": int,
    "tol_outer": float,
    "tv_epsilon": float,
    "relaxation": float,
    "max_inner": int,
    "krylov_memory": int,
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


def _parse_list(text):
    return tuple(item.strip() for item in text.split(",") if item.strip())


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``a_recon``, when set, replaces the true attenuation in the
    reconstruction operator by the constant ``a = a_recon`` inside the
    support (``lambda = a_recon / c_hat``, ``psi = c_tilde * lambda``).
    ``support_constraint`` restricts every solver to images vanishing
    outside the specimen mask.
    """

    N: int = 129
    phantom: str = "structured_disk"
    mode: str = "constant"
    c: float = 1.0
    c_hat: float = 1.0
    c_tilde: float = 0.6
    lambda_bg: float = 1.1
    lambda_slope: float = 1.0
    amplitude: float = 1.0
    edge_width: float = 0.0
    puncta: float = 0.0
    radius: float = 0.85
    a_recon: float | None = None
    beta: float = 0.01
    seed: int = 0
    crossfade: int = 0
    solvers: tuple = SOLVER_NAMES
    eta: float = 1.01
    max_iter: int = 500
    tol_outer: float = 1e-3
    tv_epsilon: float = 1e-2
    relaxation: float = 1.9
    max_inner: int = 200
    krylov_memory: int = 30
    support_constraint: bool = True
    timing: bool = True
    output_dir: str = "lsfm_out"
    solver_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.N < 2:
            raise ConfigError("N must be at least 2")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.phantom not in SHAPES:
            raise ConfigError(f"unknown phantom {self.phantom!r}; choose from {SHAPES}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {MODES}")
        bad = [s for s in self.solvers if s not in SOLVER_NAMES]
        if bad:
            raise ConfigError(f"unknown solver(s) {bad}; choose from {list(SOLVER_NAMES)}")
        for name in self.solver_overrides:
            if name not in SOLVER_NAMES:
                raise ConfigError(f"override for unknown solver {name!r}")
        if self.a_recon is not None and self.a_recon < 0:
            raise ConfigError("a_recon must be nonnegative")
        if self.c_hat <= 0 and self.a_recon is not None:
            raise ConfigError("a_recon needs c_hat > 0")
        if self.edge_width < 0 or self.puncta < 0:
            raise ConfigError("edge_width and puncta must be nonnegative")
        if self.crossfade < 0:
            raise ConfigError("crossfade must be nonnegative")

    def solver_settings(self, name: str) -> dict:
        """Solver keyword settings: global values with per-solver overrides applied."""
        out = {key: getattr(self, key) for key in SOLVER_KEYS}
        out.update(self.solver_overrides.get(name, {}))
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_PARSERS = {
    "N": int,
    "phantom": str.strip,
    "mode": str.strip,
    "a_recon": _parse_optional_float,
    "seed": int,
    "crossfade": int,
    "solvers": _parse_list,
    "timing": _parse_bool,
    "support_constraint": _parse_bool,
    "output_dir": str.strip,
}
_PARSERS.update({key: typ for key, typ in SOLVER_KEYS.items()})
for _f in fields(ExperimentConfig):
    if _f.name not in _PARSERS and _f.name != "solver_overrides":
        _PARSERS[_f.name] = float

VALID_KEYS = tuple(sorted(_PARSERS)) + tuple(f"<solver>.{k}" for k in sorted(SOLVER_KEYS))


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse configuration text; errors carry ``source:line``."""
    values = {}
    overrides = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {seen[key]})")
        seen[key] = lineno
        if "." in key:
            solver, _, sub = key.partition(".")
            if solver not in SOLVER_NAMES or sub not in SOLVER_KEYS:
                raise ConfigError(f"{where}: unknown key {key!r}; valid keys: {', '.join(VALID_KEYS)}")
            parser, target = SOLVER_KEYS[sub], overrides.setdefault(solver, {})
            name = sub
        elif key in _PARSERS:
            parser, target, name = _PARSERS[key], values, key
        else:
            raise ConfigError(f"{where}: unknown key {key!r}; valid keys: {', '.join(VALID_KEYS)}")
        try:
            target[name] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
    try:
        return ExperimentConfig(**values, solver_overrides=overrides)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def read_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def format_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the file format (round-trips through ``parse_config``)."""
    lines = []
    for f in fields(cfg):
        if f.name == "solver_overrides":
            continue
        val = getattr(cfg, f.name)
        if isinstance(val, tuple):
            val = ",".join(val)
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{f.name} = {'none' if val is None else val}")
    for solver, opts in sorted(cfg.solver_overrides.items()):
        for key, val in sorted(opts.items()):
            lines.append(f"{solver}.{key} = {val!r}")
    return "\n".join(lines) + "\n"
