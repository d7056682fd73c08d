"""Command line entry points.

Exit codes: 0 on success, 1 on configuration errors, 2 when a run diverges.
"""

import argparse
import logging
import sys

from .models import ConfigError
from . import harness


def _load(path):
    return harness.parse_config(path)


def _cmd_run(args):
    cfg = _load(args.config)
    if cfg.experiment == "drift":
        result, rate = harness.run_drift(cfg)
        if rate is not None:
            print(f"drift rate {rate:.6g}")
    elif cfg.experiment == "scaling":
        res = harness.scaling_symmetry_test(cfg.beta, cfg)
        print(f"scaling beta={res.beta} max discrepancy {res.max_discrepancy:.6g}")
        return 0
    elif cfg.experiment == "galerkin":
        rows = harness.run_galerkin(cfg)
        for n_modes, diff in rows:
            print(f"galerkin n_modes={n_modes} l2_diff {diff:.6g}")
        return 0
    elif cfg.experiment == "figures":
        result = harness.run_figures(cfg)
    else:
        result = harness.run_plain(cfg)
    print(f"status {result.status} after {result.steps_completed}/{result.nsteps} steps")
    if result.cfl_violations:
        print(f"advective CFL advisory triggered at {result.cfl_violations} samples",
              file=sys.stderr)
    return 0 if result.status == "completed" else 2


def _cmd_drift(args):
    cfg = _load(args.config)
    cfg = harness.with_updates(cfg, model="vector")
    result, rate = harness.run_drift(cfg)
    if rate is None:
        print("drift rate degenerate (norm never left the noise floor)")
    else:
        print(f"drift rate {rate:.6g}")
    print(f"status {result.status} after {result.steps_completed}/{result.nsteps} steps")
    return 0 if result.status == "completed" else 2


def _cmd_scaling(args):
    cfg = _load(args.config)
    if cfg.lam != 0.0:
        raise ConfigError("scaling symmetry requires lambda=0")
    res = harness.scaling_symmetry_test(args.beta, cfg)
    for t, gap in zip(res.times, res.discrepancies):
        print(f"t={t:.6g} discrepancy={gap:.6g}")
    print(f"max discrepancy {res.max_discrepancy:.6g}")
    return 0


def _cmd_figures(args):
    cfg = _load(args.config)
    result = harness.run_figures(cfg)
    print(f"status {result.status} after {result.steps_completed}/{result.nsteps} steps")
    return 0 if result.status == "completed" else 2


def _cmd_validate(args):
    results = harness.validate(corrupt_dealias=args.corrupt_dealias)
    failed = [r for r in results if not r.ok]
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'} {r.name}: {r.detail}")
    return 0 if not failed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kse",
        description="2D Kuramoto-Sivashinsky pseudo-spectral runs and diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the experiment named in the config")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("drift", help="vector run tracking the solenoidal part")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_drift)

    p = sub.add_parser("scaling", help="rescaling-symmetry check (lambda=0)")
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("config")
    p.set_defaults(fn=_cmd_scaling)

    p = sub.add_parser("figures", help="desk-scale figure-reproduction run")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_figures)

    p = sub.add_parser("validate", help="run the built-in self checks")
    p.add_argument("--corrupt-dealias", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(fn=_cmd_validate)

    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
