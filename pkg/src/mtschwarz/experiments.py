"""Config-driven runs and the two-square overlap experiments."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .diagnostics import max_modulus_report
from .discretization import SourceSpec, assemble_global, source_to_rhs
from .expressions import expression, manufactured, manufactured_rhs
from .geometry import build_grid
from .schwarz import (SchwarzSetup, estimate_contraction, initial_guess, monolithic_solve,
                      run_schwarz)

TWO_SQUARES = [(0.0, 1.0, 0.0, 1.0), (1.0, 2.0, 0.0, 1.0)]
POINTS_PER_SQUARE = 30
FIG2_ITERATIONS = (1, 5, 15)
FIG3_OVERLAPS = (2, 4, 6)
GRID_READING = "30 nodes per unit square side, joint column shared (59x30 lattice)"


def source_field(cfg, grid):
    """Right-hand side ``f`` and, for manufactured runs, the exact solution."""
    mode = cfg.source_mode
    if mode == "rhs_zero":
        return np.zeros(grid.n_nodes, dtype=complex), None
    if mode == "rhs":
        return grid.sample(expression(cfg.source_expr)).astype(complex), None
    if mode == "manufactured":
        exact = grid.sample(manufactured(cfg.source_solution)[0]).astype(complex)
        f = grid.sample(manufactured_rhs(cfg.source_solution, cfg.omega))
        return np.asarray(f, dtype=complex), exact
    src = SourceSpec(jx=grid.sample(expression(cfg.source_jx)),
                     jz=grid.sample(expression(cfg.source_jz)))
    return source_to_rhs(src, grid).astype(complex), None


@dataclass
class SolveOutcome:
    result: object
    reference: np.ndarray
    exact: np.ndarray | None
    gamma: float
    error_vs_exact: float | None
    error_vs_monolithic: float

    @property
    def converged(self):
        return self.result.converged


def solve(cfg):
    grid = build_grid(cfg.rectangles, cfg.h)
    f, exact = source_field(cfg, grid)
    setup = SchwarzSetup.build(grid, cfg.tiles, cfg.d, cfg.omega, f)
    reference = monolithic_solve(grid, cfg.omega, f)
    u0 = initial_guess(cfg.init_kind, grid, lo=cfg.init_lo, hi=cfg.init_hi, seed=cfg.seed)
    result = run_schwarz(setup, u0, tol=cfg.tol, max_iter=cfg.max_iter, reference=reference,
                         variant=cfg.variant, workers=cfg.workers)
    err_exact = None if exact is None else float(np.max(np.abs(result.u - exact)))
    return SolveOutcome(result=result, reference=reference, exact=exact, gamma=result.gamma,
                        error_vs_exact=err_exact,
                        error_vs_monolithic=float(np.max(np.abs(result.u - reference))))


def write_solve_outputs(cfg, outcome, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    res = outcome.result
    grid = res.setup.grid
    io.write_field_csv(out_dir / "solution.csv", grid, res.u)
    io.write_history_csv(out_dir / "history.csv", res.history)
    io.write_decomposition_csv(out_dir / "decomposition.csv", grid, res.setup.subdomains,
                               res.setup.pou)
    items = list(cfg.items()) + [
        ("grid.nx", grid.nx), ("grid.nz", grid.nz), ("grid.reading", GRID_READING),
        ("result.status", "converged" if res.converged else "max_iter"),
        ("result.iterations", res.history.iterations),
        ("result.interface_residual", res.history.interface_residual[-1]),
        ("result.gamma_hat", outcome.gamma),
        ("result.error_vs_monolithic", outcome.error_vs_monolithic),
    ]
    if outcome.error_vs_exact is not None:
        items.append(("manufactured.error_maxnorm", outcome.error_vs_exact))
    io.write_manifest(out_dir / "manifest.txt", items)


def two_square_setup(d, f=None, points=POINTS_PER_SQUARE, omega=1.0):
    grid = build_grid(TWO_SQUARES, 1.0 / (points - 1))
    if f is None:
        f = np.zeros(grid.n_nodes, dtype=complex)
    return SchwarzSetup.build(grid, TWO_SQUARES, d, omega, f)


def fig2(seed=0, out_dir=None, workers=1, d=6):
    """Error moduli on the left subdomain for a homogeneous run from random data."""
    setup = two_square_setup(d)
    grid = setup.grid
    u0 = initial_guess("uniform_random", grid, lo=0.0, hi=1.0, seed=seed)
    zero = np.zeros(grid.n_nodes, dtype=complex)
    result = run_schwarz(setup, u0, tol=0.0, max_iter=max(FIG2_ITERATIONS), reference=zero,
                         workers=workers, keep_states=True)
    entries = max_modulus_report(result.states, setup, zero)
    left = setup.subdomains[0]
    moduli = {n: np.abs(result.states[n].u_local[0]) for n in FIG2_ITERATIONS}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        x, z = grid.x[left.nodes], grid.z[left.nodes]
        for n, mod in moduli.items():
            rows = ([str(int(p)), x[a], z[a], mod[a]] for a, p in enumerate(left.nodes))
            io.write_csv(out_dir / f"fig2_error_n{n}.csv", ["node_index", "x", "z", "abs_error"],
                         rows)
        io.write_max_modulus_csv(out_dir / "fig2_max_modulus.csv", entries)
        io.write_manifest(out_dir / "fig2_manifest.txt", [
            ("seed", seed), ("omega", 1.0), ("schwarz.d", d), ("source", "rhs_zero"),
            ("init", "uniform_random 0 1"), ("grid.reading", GRID_READING),
            ("iterations", " ".join(str(n) for n in FIG2_ITERATIONS)),
        ])
    return result, entries, moduli


def fig3(seed=0, out_dir=None, workers=1, tol=1e-10, max_iter=200, overlaps=FIG3_OVERLAPS):
    """Interface residual histories for several overlaps from the same random start."""
    results = {}
    for d in overlaps:
        setup = two_square_setup(d)
        u0 = initial_guess("uniform_random", setup.grid, lo=0.0, hi=1.0, seed=seed)
        zero = np.zeros(setup.grid.n_nodes, dtype=complex)
        results[d] = run_schwarz(setup, u0, tol=tol, max_iter=max_iter, reference=zero,
                                 workers=workers)
    gammas = {d: estimate_contraction(r.history.interface_residual) for d, r in results.items()}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        length = max(len(r.history.interface_residual) for r in results.values())
        rows = []
        for n in range(length):
            row = [str(n)]
            for d in overlaps:
                hist = results[d].history.interface_residual
                row.append(hist[n] if n < len(hist) else "")
            rows.append(row)
        io.write_csv(out_dir / "fig3_history.csv",
                     ["n"] + [f"residual_d{d}" for d in overlaps], rows)
        io.write_csv(out_dir / "fig3_gamma.csv", ["d", "iterations", "converged", "gamma_hat"],
                     ([str(d), str(results[d].history.iterations),
                       "true" if results[d].converged else "false", gammas[d]]
                      for d in overlaps))
        io.write_manifest(out_dir / "fig3_manifest.txt", [
            ("seed", seed), ("omega", 1.0), ("overlaps", " ".join(map(str, overlaps))),
            ("schwarz.tol", float(tol)), ("schwarz.max_iter", max_iter),
            ("source", "rhs_zero"), ("init", "uniform_random 0 1"),
            ("grid.reading", GRID_READING),
        ])
    return results, gammas


def export_matrix(cfg, path):
    grid = build_grid(cfg.rectangles, cfg.h)
    problem = assemble_global(grid, cfg.omega)
    comment = (f"Laplace_h - i*omega*I, omega={cfg.omega!r}, h={grid.h!r}, "
               f"{grid.nx}x{grid.nz} lattice, unknowns = interior nodes in row-major (z, x) order")
    return io.write_matrix_market(path, problem.operator, comment=comment)
