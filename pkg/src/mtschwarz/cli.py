"""Command line front end: ``mtschwarz {solve,fig2,fig3,export-matrix}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments
from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if getattr(args, "max_iter", None) is not None:
        cfg.max_iter = args.max_iter
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "out", None) is not None:
        cfg.output_dir = str(args.out)
    return cfg.validate()


def cmd_solve(args):
    cfg = _load(args)
    outcome = experiments.solve(cfg)
    experiments.write_solve_outputs(cfg, outcome, cfg.output_dir)
    hist = outcome.result.history
    print(f"{'converged' if outcome.converged else 'not converged'} after {hist.iterations} "
          f"iterations, interface residual {hist.interface_residual[-1]:.3e}, "
          f"gamma_hat {outcome.gamma:.4f}")
    return EXIT_OK if outcome.converged else EXIT_NOT_CONVERGED


def cmd_fig2(args):
    _, entries, moduli = experiments.fig2(seed=args.seed, out_dir=args.out, workers=args.workers)
    for n, mod in moduli.items():
        print(f"n={n:2d}  max|e_1| = {mod.max():.6e}")
    bad = sum(e.violation for e in entries)
    print(f"max-modulus violations: {bad}")
    return EXIT_OK


def cmd_fig3(args):
    results, gammas = experiments.fig3(seed=args.seed, out_dir=args.out, workers=args.workers,
                                       tol=args.tol, max_iter=args.max_iter)
    for d, res in results.items():
        print(f"d={d}: {res.history.iterations} iterations, gamma_hat {gammas[d]:.4f}")
    return EXIT_OK if all(r.converged for r in results.values()) else EXIT_NOT_CONVERGED


def cmd_export_matrix(args):
    cfg = _load(args)
    try:
        path = experiments.export_matrix(cfg, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mtschwarz",
        description="Parallel Schwarz solver for Laplace(u) - i*omega*u = f on rectangle unions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a configured solve")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_solve)

    for name, func, helptext in (("fig2", cmd_fig2, "error moduli at n = 1, 5, 15"),
                                 ("fig3", cmd_fig3, "residual histories for d = 2, 4, 6")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, default=Path(name))
        p.add_argument("--workers", type=int, default=1)
        if name == "fig3":
            p.add_argument("--tol", type=float, default=1e-10)
            p.add_argument("--max-iter", type=int, default=200)
        p.set_defaults(func=func)

    p = sub.add_parser("export-matrix", help="write the global operator in Matrix Market format")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, help="target .mtx path")
    p.set_defaults(func=cmd_export_matrix)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # geometry / decomposition rejections stem from the configuration
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
