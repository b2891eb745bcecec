"""Five-point finite differences for ``Laplace(u) - i*omega*u = f``.

Dirichlet nodes are eliminated: a :class:`DiscreteProblem` carries the
operator over its unknowns plus a coupling matrix that moves boundary
values to the right-hand side, so the operator never depends on boundary
data and can be factored once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import EXTERIOR, INTERIOR

# (di, dk) offsets of the four stencil legs
_LEGS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _check_omega(omega):
    omega = float(omega)
    if omega == 0.0 or not np.isfinite(omega):
        raise ValueError(f"omega must be a finite non-zero real, got {omega!r}")
    return omega


def _check_finite(values, name):
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} contains non-finite values")
    return values


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    """Assembled system ``A u = rhs - B g`` over a set of unknown nodes.

    Attributes
    ----------
    operator : scipy.sparse.csc_matrix
        ``Laplace_h - i*omega*I`` restricted to the unknowns.
    coupling : scipy.sparse.csc_matrix
        Maps Dirichlet values (ordered as ``boundary_nodes``) into the rows.
    dof_map : ndarray
        Domain index of each unknown.
    boundary_nodes : ndarray
        Domain indices of the Dirichlet nodes.
    rhs : ndarray or None
        Source restricted to the unknowns when assembled with one.
    """

    operator: sp.csc_matrix
    coupling: sp.csc_matrix
    dof_map: np.ndarray
    boundary_nodes: np.ndarray
    omega: float
    h: float
    rhs: np.ndarray | None = None

    @property
    def n_unknowns(self):
        return self.dof_map.size


def _assemble(grid, unknowns, dirichlet, omega):
    omega = _check_omega(omega)
    n = unknowns.size
    pos = np.full(grid.n_nodes, -1, dtype=np.int64)
    pos[unknowns] = np.arange(n)
    bpos = np.full(grid.n_nodes, -1, dtype=np.int64)
    bpos[dirichlet] = np.arange(dirichlet.size)

    inv_h2 = 1.0 / grid.h ** 2
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [np.full(n, -4.0 * inv_h2 - 1j * omega)]
    b_rows, b_cols = [], []
    i, k = grid.ik
    i, k = i[unknowns], k[unknowns]
    for di, dk in _LEGS:
        nb = grid.node_id[(k + dk) * grid.nx + (i + di)]
        if np.any(nb < 0):
            raise ValueError("stencil of an unknown reaches outside the domain")
        p, q = pos[nb], bpos[nb]
        inner = p >= 0
        rows.append(np.flatnonzero(inner))
        cols.append(p[inner])
        vals.append(np.full(inner.sum(), inv_h2, dtype=complex))
        edge = q >= 0
        if np.any(~inner & ~edge):
            raise ValueError("stencil neighbour is neither an unknown nor a Dirichlet node")
        b_rows.append(np.flatnonzero(edge))
        b_cols.append(q[edge])

    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    br = np.concatenate(b_rows)
    B = sp.csc_matrix((np.full(br.size, inv_h2, dtype=complex), (br, np.concatenate(b_cols))),
                      shape=(n, dirichlet.size))
    A.sort_indices()
    B.sort_indices()
    return A, B


def assemble_global(grid, omega, f=None):
    """Assemble the global problem with homogeneous Dirichlet data.

    ``f`` is a domain field; only interior values are used.
    """
    unknowns = grid.interior
    A, B = _assemble(grid, unknowns, grid.boundary, omega)
    rhs = None
    if f is not None:
        f = _check_finite(f, "f")
        rhs = np.asarray(f, dtype=complex)[unknowns].copy()
    return DiscreteProblem(operator=A, coupling=B, dof_map=unknowns,
                           boundary_nodes=grid.boundary, omega=float(omega), h=grid.h, rhs=rhs)


def assemble_local(grid, subdomain, omega):
    """Assemble a subdomain problem; Dirichlet nodes are interface then physical."""
    dirichlet = np.concatenate([subdomain.interface, subdomain.physical])
    A, B = _assemble(grid, subdomain.inner, dirichlet, omega)
    return DiscreteProblem(operator=A, coupling=B, dof_map=subdomain.inner,
                           boundary_nodes=dirichlet, omega=float(omega), h=grid.h)


def apply_operator(u, grid, omega):
    """Matrix-free ``Laplace_h u - i*omega*u`` at interior nodes (zero elsewhere)."""
    omega = _check_omega(omega)
    U = grid.to_lattice(np.asarray(u, dtype=complex))
    out = np.zeros_like(U)
    c = U[1:-1, 1:-1]
    out[1:-1, 1:-1] = ((U[1:-1, 2:] + U[1:-1, :-2] + U[2:, 1:-1] + U[:-2, 1:-1] - 4.0 * c)
                       / grid.h ** 2 - 1j * omega * c)
    res = grid.from_lattice(out)
    res[grid.classes != INTERIOR] = 0.0
    return res


def derivative(values, grid, axis):
    """Second-order first derivative of a domain field along ``x`` or ``z``.

    Centered where both neighbours are domain nodes, otherwise a one-sided
    three-point formula (two-point if the domain is a single cell thick).
    """
    if axis not in ("x", "z"):
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
    V = grid.to_lattice(np.asarray(values))
    inside = grid.node_class != EXTERIOR
    if axis == "z":
        V, inside = V.T, inside.T
    # padded copies make neighbour lookups uniform at the lattice edge
    Vp = np.pad(V, ((0, 0), (2, 2)))
    Mp = np.pad(inside, ((0, 0), (2, 2)))
    c = slice(2, -2)
    m1, p1 = Mp[:, 1:-3], Mp[:, 3:-1]
    m2, p2 = Mp[:, 0:-4], Mp[:, 4:]
    v0 = Vp[:, c]
    vm1, vp1, vm2, vp2 = Vp[:, 1:-3], Vp[:, 3:-1], Vp[:, 0:-4], Vp[:, 4:]
    h = grid.h

    D = np.zeros(V.shape, dtype=np.result_type(V, float))
    central = m1 & p1
    forward2 = ~m1 & p1 & p2
    backward2 = ~p1 & m1 & m2
    forward1 = ~m1 & p1 & ~p2
    backward1 = ~p1 & m1 & ~m2
    D[central] = ((vp1 - vm1) / (2 * h))[central]
    D[forward2] = ((-3 * v0 + 4 * vp1 - vp2) / (2 * h))[forward2]
    D[backward2] = ((3 * v0 - 4 * vm1 + vm2) / (2 * h))[backward2]
    D[forward1] = ((vp1 - v0) / h)[forward1]
    D[backward1] = ((v0 - vm1) / h)[backward1]
    if axis == "z":
        D = D.T
    return grid.from_lattice(D)


@dataclass(frozen=True)
class SourceSpec:
    """Exterior current components ``(J_x, J_z)`` as domain fields; unit conductivity."""

    jx: np.ndarray
    jz: np.ndarray

    def __post_init__(self):
        _check_finite(self.jx, "J_x")
        _check_finite(self.jz, "J_z")


def source_to_rhs(src, grid):
    """Right-hand side ``f = -dJ_x/dz + dJ_z/dx`` on the domain nodes."""
    return -derivative(src.jx, grid, "z") + derivative(src.jz, grid, "x")


def recover_electric_field(u, src, grid):
    """Electric field from the magnetic component for unit conductivity.

    Returns ``(E_x, E_z)`` with ``E_x = -du/dz - J_x`` and ``E_z = du/dx - J_z``.
    """
    ex = -derivative(u, grid, "z") - src.jx
    ez = derivative(u, grid, "x") - src.jz
    return ex, ez


def faraday_residual(u, ex, ez, grid, omega):
    """``dE_x/dz - dE_z/dx + i*omega*u`` at every domain node."""
    return derivative(ex, grid, "z") - derivative(ez, grid, "x") + 1j * omega * np.asarray(u)
