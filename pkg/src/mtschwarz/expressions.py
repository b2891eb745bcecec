"""Built-in expression table for sources and manufactured solutions.

Each entry maps an id to a function of ``(x, z)``.  Manufactured
solutions additionally carry their exact Laplacian so the right-hand side
``Laplace(u) - i*omega*u`` can be formed analytically.
"""
from __future__ import annotations

import numpy as np

PI = np.pi


def _bump(x, z):
    return np.exp(-20.0 * ((x - 0.6) ** 2 + (z - 0.4) ** 2))


EXPRESSIONS = {
    "zero": lambda x, z: np.zeros_like(x, dtype=float),
    "one": lambda x, z: np.ones_like(x, dtype=float),
    "x": lambda x, z: x,
    "z": lambda x, z: z,
    "z2": lambda x, z: z ** 2,
    "sin_pi_x": lambda x, z: np.sin(PI * x),
    "cos_pi_x": lambda x, z: np.cos(PI * x),
    "sin_pi_z": lambda x, z: np.sin(PI * z),
    "sinsin": lambda x, z: np.sin(PI * x) * np.sin(PI * z),
    "bump": _bump,
    "smooth": lambda x, z: np.cos(PI * x) * (1.0 + z) + 0.5 * np.sin(2.0 * PI * z),
}

# id -> (solution, laplacian); each solution vanishes on integer grid lines
MANUFACTURED = {
    "sinsin": (lambda x, z: np.sin(PI * x) * np.sin(PI * z),
               lambda x, z: -2.0 * PI ** 2 * np.sin(PI * x) * np.sin(PI * z)),
    "sin2sin": (lambda x, z: np.sin(2 * PI * x) * np.sin(PI * z),
                lambda x, z: -5.0 * PI ** 2 * np.sin(2 * PI * x) * np.sin(PI * z)),
}


def expression(name):
    try:
        return EXPRESSIONS[name]
    except KeyError:
        raise KeyError(f"unknown expression id {name!r}; known: {sorted(EXPRESSIONS)}") from None


def manufactured(name):
    try:
        return MANUFACTURED[name]
    except KeyError:
        raise KeyError(f"unknown manufactured solution {name!r}; "
                       f"known: {sorted(MANUFACTURED)}") from None


def manufactured_rhs(name, omega):
    """``f(x, z) = Laplace(u) - i*omega*u`` for a manufactured solution."""
    u, lap = manufactured(name)
    return lambda x, z: lap(x, z) - 1j * omega * u(x, z)


def homogeneous_exponential(omega):
    """``exp(lambda x)`` with ``lambda^2 = i*omega``: solves the homogeneous equation."""
    lam = np.sqrt(1j * omega)
    return lambda x, z: np.exp(lam * x) * np.ones_like(z)
