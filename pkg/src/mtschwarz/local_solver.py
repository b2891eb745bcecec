"""Direct sparse LU for subdomain Dirichlet problems."""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

# fixed column ordering: part of the determinism contract
PERMC_SPEC = "COLAMD"


class SingularSystemError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Factorization:
    """LU factors of a :class:`DiscreteProblem` operator; read-only once built."""

    lu: spla.SuperLU | None
    problem: object
    subdomain_id: int | None = None
    n_interface: int = 0

    def solve(self, b):
        b = np.asarray(b, dtype=complex)
        if self.lu is None:
            return np.zeros(0, dtype=complex)
        return self.lu.solve(b)


def factor(problem, subdomain_id=None, n_interface=None):
    """Factor ``problem.operator``.

    ``n_interface`` is the number of leading Dirichlet nodes that carry
    transmission data; the rest are physical boundary nodes held at zero.
    Defaults to all Dirichlet nodes.
    """
    A = problem.operator
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be square, got shape {A.shape}")
    if n_interface is None:
        n_interface = problem.boundary_nodes.size
    lu = None
    if A.shape[0] > 0:
        try:
            lu = spla.splu(A.tocsc(), permc_spec=PERMC_SPEC)
        except RuntimeError as exc:
            where = "global problem" if subdomain_id is None else f"subdomain {subdomain_id}"
            raise SingularSystemError(f"singular operator for {where}: {exc}") from exc
        diag_u = np.abs(lu.U.diagonal())
        if not np.all(np.isfinite(diag_u)) or diag_u.min() <= 1e-14 * diag_u.max():
            where = "global problem" if subdomain_id is None else f"subdomain {subdomain_id}"
            raise SingularSystemError(f"numerically singular pivot in {where}")
    return Factorization(lu=lu, problem=problem, subdomain_id=subdomain_id,
                         n_interface=int(n_interface))


def _interface_values(fact, g, interface):
    n = fact.n_interface
    if isinstance(g, Mapping):
        missing = [int(p) for p in interface if int(p) not in g]
        if missing:
            raise ValueError(f"boundary data missing for interface nodes {missing[:5]}")
        return np.array([g[int(p)] for p in interface], dtype=complex)
    if g is None:
        g = np.zeros(n, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if g.shape != (n,):
        raise ValueError(f"boundary data must have one value per interface node "
                         f"({n}), got shape {g.shape}")
    return g


def solve_dirichlet(fact, f, g, subdomain=None):
    """Solve the local Dirichlet problem.

    Parameters
    ----------
    fact : Factorization
    f : array_like
        Source as a global domain field (only the unknowns are read).
    g : array_like or Mapping
        Values on the interface nodes, in subdomain order, or a mapping
        from domain index to value.
    subdomain : Subdomain, optional
        When given the result is laid out over ``subdomain.nodes``;
        otherwise a ``(unknown_values, dirichlet_values)`` pair is returned.
    """
    problem = fact.problem
    interface = problem.boundary_nodes[:fact.n_interface]
    gi = _interface_values(fact, g, interface)
    gb = np.zeros(problem.boundary_nodes.size, dtype=complex)
    gb[:fact.n_interface] = gi
    rhs = np.asarray(f, dtype=complex)[problem.dof_map] - problem.coupling @ gb
    x = fact.solve(rhs)
    if subdomain is None:
        return x, gb
    out = np.empty(subdomain.nodes.size, dtype=complex)
    out[subdomain.local_positions(problem.dof_map)] = x
    out[subdomain.local_positions(problem.boundary_nodes)] = gb
    return out
