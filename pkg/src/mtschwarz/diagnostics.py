"""Numerical checks of the maximum-modulus convergence argument.

* :func:`subharmonic_defect` measures how far ``Laplace(|u|^2)`` is from
  ``2 |grad u|^2`` on the grid.
* :func:`check_max_modulus` reports where an error field peaks on a
  subdomain and the contraction witness ``max_K |e| / max_Gamma |e|``.
* :func:`contraction_check` verifies the per-step error bound built from
  those witnesses over a whole run.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import derivative
from .geometry import INTERIOR
from .schwarz import estimate_contraction  # noqa: F401  (re-exported)

VIOLATION_RTOL = 1e-12


def discrete_laplacian(values, grid):
    """Five-point Laplacian at interior nodes (zero elsewhere)."""
    V = grid.to_lattice(np.asarray(values))
    out = np.zeros_like(V)
    out[1:-1, 1:-1] = (V[1:-1, 2:] + V[1:-1, :-2] + V[2:, 1:-1] + V[:-2, 1:-1]
                       - 4.0 * V[1:-1, 1:-1]) / grid.h ** 2
    res = grid.from_lattice(out)
    res[grid.classes != INTERIOR] = 0.0
    return res


def gradient_sq(u, grid):
    """``|grad_h u|^2`` with second-order differences on every domain node."""
    ux = derivative(u, grid, "x")
    uz = derivative(u, grid, "z")
    return np.abs(ux) ** 2 + np.abs(uz) ** 2


def subharmonic_defect_field(u, grid):
    """``Laplace_h(|u|^2) - 2 |grad_h u|^2`` at interior nodes (zero elsewhere)."""
    u = np.asarray(u)
    defect = discrete_laplacian(np.abs(u) ** 2, grid) - 2.0 * gradient_sq(u, grid)
    defect[grid.classes != INTERIOR] = 0.0
    return defect


def subharmonic_defect(u, grid, omega=None):
    """Max over interior nodes of ``|Laplace_h(|u|^2) - 2 |grad_h u|^2|``.

    ``omega`` is accepted for interface symmetry; the identity holds for any
    frequency when ``u`` solves the homogeneous equation.
    """
    defect = subharmonic_defect_field(u, grid)
    return float(np.max(np.abs(defect[grid.interior]), initial=0.0))


def min_laplacian_modulus(e_local, grid, subdomain):
    """Smallest ``Laplace_h(|e|^2)`` over the subdomain's inner nodes."""
    full = np.zeros(grid.n_nodes)
    full[subdomain.nodes] = np.abs(e_local) ** 2
    lap = discrete_laplacian(full, grid)
    return float(np.min(lap[subdomain.inner], initial=np.inf))


@dataclass(frozen=True)
class MaxModulusEntry:
    n: int
    j: int
    max_interior: float
    max_interface: float
    ratio_K: float
    violation: bool


def check_max_modulus(e_local, subdomain, support=None, n=0, rtol=VIOLATION_RTOL):
    """Where does ``|e|`` peak on one subdomain?

    Parameters
    ----------
    e_local : array_like
        Error over ``subdomain.nodes``.
    support : array_like, optional
        Domain indices of the partition-of-unity support ``K_j``.  When
        omitted ``ratio_K`` is NaN.
    """
    mod = np.abs(np.asarray(e_local))
    pos = subdomain.local_positions
    max_interior = float(np.max(mod[pos(subdomain.inner)], initial=0.0))
    max_interface = float(np.max(mod[pos(subdomain.interface)], initial=0.0))
    if support is None:
        ratio = float("nan")
    else:
        max_k = float(np.max(mod[pos(np.asarray(support, dtype=np.int64))], initial=0.0))
        if max_k == 0.0:
            ratio = 0.0
        elif max_interface == 0.0:
            ratio = float("inf")
        else:
            ratio = max_k / max_interface
    violation = max_interior > max_interface * (1.0 + rtol)
    return MaxModulusEntry(n=n, j=subdomain.id, max_interior=max_interior,
                           max_interface=max_interface, ratio_K=ratio, violation=bool(violation))


def error_fields(state, subdomains, reference):
    """``u - u_j^n`` for each subdomain of a Schwarz state."""
    reference = np.asarray(reference)
    return [reference[sd.nodes] - v for sd, v in zip(subdomains, state.u_local)]


def max_modulus_report(states, setup, reference):
    """Report entries for every state ``n >= 1`` and every subdomain."""
    supports = setup.pou.supports
    entries = []
    for state in states:
        if state.n == 0:
            continue
        for sd, e in zip(setup.subdomains, error_fields(state, setup.subdomains, reference)):
            entries.append(check_max_modulus(e, sd, supports[sd.id - 1], n=state.n))
    return entries


@dataclass(frozen=True)
class ContractionCheck:
    """Outcome of the step bound ``E_{n+1} <= max_j ratio_K(j, n) E_n + slack``."""

    ok: bool
    worst_margin: float  # max over n of E_{n+1} - bound (<= slack when ok)
    max_ratio: float
    steps: int


def contraction_check(states, setup, reference, slack=1e-10):
    """Check the one-step error bound over consecutive states with ``n >= 1``.

    The first step is skipped: the initial error does not solve the local
    homogeneous problems, so the interface bound does not apply to it.
    """
    supports = setup.pou.supports
    E, ratios = [], []
    for state in states:
        errs = error_fields(state, setup.subdomains, reference)
        E.append(max(float(np.max(np.abs(e), initial=0.0)) for e in errs))
        ratios.append(max(check_max_modulus(e, sd, supports[sd.id - 1]).ratio_K
                          for sd, e in zip(setup.subdomains, errs)))
    margins, used = [], []
    for a in range(len(states) - 1):
        if states[a].n < 1:
            continue
        if E[a] == 0.0:
            margins.append(E[a + 1])
            continue
        used.append(ratios[a])
        margins.append(E[a + 1] - ratios[a] * E[a])
    worst = max(margins, default=0.0)
    max_ratio = max(used, default=0.0)
    return ContractionCheck(ok=worst <= slack and max_ratio < 1.0, worst_margin=worst,
                            max_ratio=max_ratio, steps=len(margins))
