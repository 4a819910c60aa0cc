"""Command line interface.

Subcommands share ``--config`` (a ``key = value`` file), ``--output`` and
``--full``.  The output directory resolves as ``--output``, then the
``LSFM_OUTPUT_DIR`` environment variable, then ``output_dir`` from the config.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, ExperimentConfig, read_config
from .experiment import Experiment

FULL_N = 257
ENV_OUTPUT = "LSFM_OUTPUT_DIR"


def _load(args) -> Experiment:
    cfg = read_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.full:
        changes["N"] = FULL_N
    elif args.N is not None:
        changes["N"] = args.N
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.solvers:
        changes["solvers"] = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    if args.no_timing:
        changes["timing"] = False
    if changes:
        cfg = cfg.replace(**changes)
    out = args.output or os.environ.get(ENV_OUTPUT) or cfg.output_dir
    return Experiment(cfg, out)


def cmd_phantom(exp, args):
    exp.write_phantom()


def cmd_forward(exp, args):
    exp.write_forward()


def cmd_noise(exp, args):
    exp.write_noise()
    print(f"noise_level {exp.noisy.noise_level:.6g}")


def cmd_fuse(exp, args):
    exp.write_fused()
    f_nre, f_ssim = exp.fused_metrics()
    if f_nre is not None:
        print(f"fused nre {f_nre:.6g} ssim {f_ssim:.6g}")


def cmd_reconstruct(exp, args):
    for name in exp.cfg.solvers:
        res = exp.write_reconstruction(name)
        metrics = "" if res.nre is None else f" nre {res.nre:.6g} ssim {res.ssim:.6g}"
        print(f"{name}: {res.iterations} iterations ({res.stop_reason}){metrics}")


def cmd_verify_heat(exp, args):
    s, worst, props = exp.write_heat_check(args.column)
    print(f"column {s}: max relative mismatch {worst:.3e}")
    for key, ok in props.items():
        print(f"  {key}: {'yes' if ok else 'NO'}")
    return 0 if worst <= args.tol else 1


def cmd_report(exp, args):
    rows = exp.run()
    width = max(len(r[0]) for r in rows)
    print(f"{'algorithm':<{width}}  iterations  time_s      nre         ssim")
    for name, it, t, e, s in rows:
        print(f"{name:<{width}}  {it:>10}  {t:<10}  {e:<10}  {s}")
    print(f"artifacts written to {exp.out}")


COMMANDS = {
    "phantom": (cmd_phantom, "write density and coefficient maps"),
    "forward": (cmd_forward, "write noise-free left/right measurements"),
    "noise": (cmd_noise, "write Poisson-perturbed measurements"),
    "fuse": (cmd_fuse, "write the fused image"),
    "reconstruct": (cmd_reconstruct, "run the configured solvers"),
    "verify-heat": (cmd_verify_heat, "check measurements against the heat-equation formula"),
    "report": (cmd_report, "run the whole pipeline and write the summary"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsfm", description="Light-sheet fluorescence reconstruction toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", help="configuration file")
        p.add_argument("-o", "--output", help=f"output directory (overrides ${ENV_OUTPUT})")
        p.add_argument("--full", action="store_true", help=f"use the full N={FULL_N} grid")
        p.add_argument("--N", type=int, help="grid size (ignored with --full)")
        p.add_argument("--seed", type=int, help="noise seed")
        p.add_argument("--solvers", help="comma separated solver list")
        p.add_argument("--no-timing", action="store_true",
                       help="write nan instead of wall times (byte-reproducible output)")
        if name == "verify-heat":
            p.add_argument("--column", type=int, help="column index (default: middle admissible column)")
            p.add_argument("--tol", type=float, default=1e-3, help="relative tolerance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fn = COMMANDS[args.command][0]
    try:
        exp = _load(args)
        status = fn(exp, args)
    except (ConfigError, ValueError, OSError, MemoryError) as exc:
        print(f"lsfm: error: {exc}", file=sys.stderr)
        return 2
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
