"""Positivity-preserving, energy-dissipative finite-difference solver for
multi-species Poisson-Nernst-Planck systems."""

from pnpflow.boundary import BoundarySpec, Segment
from pnpflow.errors import (
    CompatibilityError,
    ConvergenceError,
    DimensionError,
    NewtonConvergenceError,
    PositivityError,
    StepRejectedError,
    UnsupportedBoundaryError,
    ZeroPivotError,
)
from pnpflow.grid import Field, Grid, inner
from pnpflow.model import ProblemSpec, SpeciesSpec, State, validate
from pnpflow.nonlinear import SolverConfig
from pnpflow.stepper import run, step_bdf2, step_be

__all__ = [
    "BoundarySpec",
    "CompatibilityError",
    "ConvergenceError",
    "DimensionError",
    "Field",
    "Grid",
    "NewtonConvergenceError",
    "PositivityError",
    "ProblemSpec",
    "Segment",
    "SolverConfig",
    "SpeciesSpec",
    "State",
    "StepRejectedError",
    "UnsupportedBoundaryError",
    "ZeroPivotError",
    "inner",
    "run",
    "step_bdf2",
    "step_be",
    "validate",
]

__version__ = "0.1.0"
