"""Penalty-projection enforcement of boundary conditions and linear
constraints on evolution ODEs and discretized PDEs."""

from . import (
    circuits,
    cli,
    diagnostics,
    grid,
    homogenize,
    integrator,
    kubo,
    operators,
    penalty,
    projectors,
    resources,
    scenarios,
)

__all__ = [
    "grid",
    "operators",
    "projectors",
    "penalty",
    "homogenize",
    "integrator",
    "diagnostics",
    "kubo",
    "circuits",
    "resources",
    "scenarios",
    "cli",
]

__version__ = "0.1.0"
