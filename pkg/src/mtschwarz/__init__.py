"""Overlapping Schwarz solver for the magnetotelluric equation ``Laplace(u) - i*omega*u = f``."""
from .discretization import (DiscreteProblem, SourceSpec, apply_operator, assemble_global,
                             assemble_local, recover_electric_field, source_to_rhs)
from .geometry import (GlobalGrid, PartitionOfUnity, Subdomain, build_grid,
                       build_partition_of_unity, decompose)
from .local_solver import Factorization, factor, solve_dirichlet
from .schwarz import (IterationHistory, SchwarzSetup, SchwarzState, alternating_step,
                      estimate_contraction, initial_guess, monolithic_solve, run_schwarz,
                      schwarz_step)

__version__ = "0.1.0"

__all__ = [
    "DiscreteProblem", "Factorization", "GlobalGrid", "IterationHistory", "PartitionOfUnity",
    "SchwarzSetup", "SchwarzState", "SourceSpec", "Subdomain", "alternating_step",
    "apply_operator", "assemble_global", "assemble_local", "build_grid",
    "build_partition_of_unity", "decompose", "estimate_contraction", "factor",
    "initial_guess", "monolithic_solve", "recover_electric_field", "run_schwarz",
    "schwarz_step", "solve_dirichlet", "source_to_rhs",
]
