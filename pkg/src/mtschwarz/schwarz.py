"""Parallel (additive) and alternating overlapping Schwarz iterations."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discretization import apply_operator, assemble_global, assemble_local
from .geometry import build_partition_of_unity, decompose
from .local_solver import factor, solve_dirichlet

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
GAMMA_WINDOW = 10
MIN_HISTORY = 12


def initial_guess(kind, grid, lo=0.0, hi=1.0, seed=0, values=None):
    """Starting global iterate.

    ``kind`` is ``"zero"``, ``"uniform_random"`` (real samples in
    ``[lo, hi]`` at every domain node, reproducible from ``seed``) or
    ``"given"`` (a copy of ``values``).
    """
    if kind == "zero":
        return np.zeros(grid.n_nodes, dtype=complex)
    if kind == "uniform_random":
        if lo > hi:
            raise ValueError(f"need lo <= hi, got lo={lo!r}, hi={hi!r}")
        rng = np.random.default_rng(seed)
        return rng.uniform(lo, hi, size=grid.n_nodes).astype(complex)
    if kind == "given":
        values = np.array(values, dtype=complex)
        if values.shape != (grid.n_nodes,):
            raise ValueError(f"given initial guess must have {grid.n_nodes} values")
        return values
    raise ValueError(f"unknown initial guess kind {kind!r}")


def monolithic_solve(grid, omega, f):
    """Direct solve of the undecomposed problem; returns a domain field."""
    problem = assemble_global(grid, omega, f)
    u = np.zeros(grid.n_nodes, dtype=complex)
    u[problem.dof_map] = factor(problem).solve(problem.rhs)
    return u


@dataclass(frozen=True, eq=False)
class SchwarzSetup:
    """Everything that stays fixed across iterations."""

    grid: object
    subdomains: list
    pou: object
    omega: float
    f: np.ndarray
    factorizations: list
    overlap_nodes: np.ndarray

    @classmethod
    def build(cls, grid, tiling, d, omega, f):
        subdomains = decompose(grid, tiling, d)
        pou = build_partition_of_unity(grid, subdomains)
        facts = [factor(assemble_local(grid, sd, omega), subdomain_id=sd.id,
                        n_interface=sd.interface.size) for sd in subdomains]
        count = np.zeros(grid.n_nodes, dtype=np.int64)
        for sd in subdomains:
            count[sd.inner] += 1
        overlap = np.flatnonzero(count >= 2)
        f = np.asarray(f, dtype=complex)
        if f.shape != (grid.n_nodes,):
            raise ValueError(f"f must have {grid.n_nodes} values, got shape {f.shape}")
        return cls(grid=grid, subdomains=subdomains, pou=pou, omega=float(omega), f=f,
                   factorizations=facts, overlap_nodes=overlap)


@dataclass(frozen=True, eq=False)
class SchwarzState:
    n: int
    u_glob: np.ndarray
    u_local: tuple


def start_state(setup, u0):
    u0 = np.asarray(u0, dtype=complex)
    local = []
    for sd in setup.subdomains:
        v = u0[sd.nodes].copy()
        v[sd.local_positions(sd.physical)] = 0.0
        local.append(v)
    return SchwarzState(n=0, u_glob=u0.copy(), u_local=tuple(local))


def _local_solve(setup, j, u_glob):
    sd = setup.subdomains[j]
    return solve_dirichlet(setup.factorizations[j], setup.f, u_glob[sd.interface], subdomain=sd)


def schwarz_step(setup, state, executor=None):
    """One parallel step: every subdomain reads the same previous iterate."""
    J = len(setup.subdomains)
    if executor is None:
        local = [_local_solve(setup, j, state.u_glob) for j in range(J)]
    else:
        local = list(executor.map(lambda j: _local_solve(setup, j, state.u_glob), range(J)))
    u_glob = setup.pou.glue(setup.subdomains, local)
    return SchwarzState(n=state.n + 1, u_glob=u_glob, u_local=tuple(local))


def alternating_step(setup, state, executor=None):
    """One sweep of sequential solves, each reading the freshest glued iterate."""
    local = list(state.u_local)
    u_glob = state.u_glob
    for j in range(len(setup.subdomains)):
        local[j] = _local_solve(setup, j, u_glob)
        u_glob = setup.pou.glue(setup.subdomains, local)
    return SchwarzState(n=state.n + 1, u_glob=u_glob, u_local=tuple(local))


def interface_residual(setup, u_glob):
    """2-norm of the global residual over the overlap nodes.

    The overlap (interior nodes shared by two or more subdomains) holds every
    interface and the whole blending zone of the partition of unity; after
    one step the residual vanishes outside it.  Without overlap (a single
    subdomain) all interior nodes are used.
    """
    r = apply_operator(u_glob, setup.grid, setup.omega) - setup.f
    nodes = setup.overlap_nodes if setup.overlap_nodes.size else setup.grid.interior
    return float(np.linalg.norm(r[nodes]))


def global_residual(setup, u_glob):
    r = apply_operator(u_glob, setup.grid, setup.omega) - setup.f
    return float(np.linalg.norm(r[setup.grid.interior]))


@dataclass
class IterationHistory:
    """Per-iteration records, index ``n`` starting at the initial guess."""

    interface_residual: list = field(default_factory=list)
    global_residual: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # per-subdomain max-norm errors
    gamma_hat: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.interface_residual) - 1

    @property
    def error_maxnorm(self):
        """``E_n = max_j ||u - u_j^n||`` for each recorded ``n``."""
        return [max(row) if row else float("nan") for row in self.errors]

    def tracked(self):
        return self.error_maxnorm if self.errors else self.interface_residual


def _ratios(values):
    v = np.asarray(values, dtype=float)
    prev, nxt = v[:-1], v[1:]
    ok = prev > 0
    return nxt[ok] / prev[ok]


def estimate_contraction(history, window=GAMMA_WINDOW):
    """Median per-step reduction factor over the last ``window`` steps.

    Accepts an :class:`IterationHistory` (error norms preferred over
    interface residuals) or a plain sequence of norms.
    """
    values = history.tracked() if isinstance(history, IterationHistory) else list(history)
    if len(values) < MIN_HISTORY:
        raise ValueError(f"need at least {MIN_HISTORY} recorded iterations, got {len(values)}")
    ratios = _ratios(values[-(window + 1):])
    if ratios.size == 0:
        return 0.0
    return float(np.median(ratios))


def _running_gamma(values):
    ratios = _ratios(values[-(GAMMA_WINDOW + 1):])
    return float(np.median(ratios)) if ratios.size else float("nan")


def _record(history, setup, state, reference):
    history.interface_residual.append(interface_residual(setup, state.u_glob))
    history.global_residual.append(global_residual(setup, state.u_glob))
    if reference is not None:
        history.errors.append([float(np.max(np.abs(reference[sd.nodes] - v), initial=0.0))
                               for sd, v in zip(setup.subdomains, state.u_local)])
    history.gamma_hat.append(_running_gamma(history.tracked()))


@dataclass(frozen=True)
class SchwarzResult:
    u: np.ndarray
    history: IterationHistory
    state: SchwarzState
    setup: SchwarzSetup
    states: list | None = None

    @property
    def converged(self):
        return self.history.converged

    @property
    def gamma(self):
        try:
            return estimate_contraction(self.history)
        except ValueError:
            return float("nan")


def run_schwarz(setup, u0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, reference=None,
                variant="parallel", workers=1, keep_states=False, min_iter=0):
    """Iterate until the interface residual drops to ``tol`` or ``max_iter`` steps.

    Parameters
    ----------
    setup : SchwarzSetup
    u0 : array_like
        Initial global iterate.
    reference : array_like, optional
        Discrete solution used for the error columns of the history.
    variant : {"parallel", "alternating"}
    workers : int
        Threads for the subdomain solves of a parallel step.  Results do not
        depend on this value.
    keep_states : bool
        Keep every intermediate state (memory grows with the iteration count).
    min_iter : int
        Steps taken before the tolerance is checked.

    Non-convergence is reported through ``history.converged``, not raised.
    """
    steps = {"parallel": schwarz_step, "alternating": alternating_step}
    if variant not in steps:
        raise ValueError(f"unknown variant {variant!r}")
    step = steps[variant]
    if reference is not None:
        reference = np.asarray(reference, dtype=complex)

    state = start_state(setup, u0)
    history = IterationHistory()
    states = [state] if keep_states else None
    _record(history, setup, state, reference)

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            if state.n >= min_iter and history.interface_residual[-1] <= tol:
                history.converged = True
                break
            if state.n >= max_iter:
                break
            state = step(setup, state, executor)
            _record(history, setup, state, reference)
            if keep_states:
                states.append(state)
    finally:
        if executor is not None:
            executor.shutdown()
    log.debug("schwarz %s: %d iterations, residual %.3e, converged=%s", variant,
              state.n, history.interface_residual[-1], history.converged)
    return SchwarzResult(u=state.u_glob, history=history, state=state, setup=setup,
                         states=states)


def reconstruction_defect(setup, state):
    """Max deviation between ``u_glob`` and the re-glued local iterates."""
    glued = setup.pou.glue(setup.subdomains, state.u_local)
    return float(np.max(np.abs(glued - state.u_glob), initial=0.0))


__all__ = [
    "IterationHistory", "SchwarzResult", "SchwarzSetup", "SchwarzState", "alternating_step",
    "estimate_contraction", "global_residual", "initial_guess", "interface_residual",
    "monolithic_solve", "reconstruction_defect", "run_schwarz", "schwarz_step", "start_state",
]
