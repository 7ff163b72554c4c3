"""The four benchmark problems and a small catalog of initial conditions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pnpflow.boundary import BoundarySpec, Segment
from pnpflow.grid import Field, Grid
from pnpflow.model import ProblemSpec, SpeciesSpec
from pnpflow.poisson import external_potential

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RunParams:
    scheme: str
    dt: float
    t_end: float


# -- initial conditions ------------------------------------------------

def _example1(sign):
    return lambda X, Y: 1.1 + sign * np.sin(X) * np.cos(Y)


def _example2(center):
    def f(X, Y):
        r2 = (X - center) ** 2 + (Y - center) ** 2
        return 1.0 + 1e-6 - np.tanh(2.0 * (r2 - (0.2 * np.pi) ** 2))
    return f


def _uniform(value=1.0):
    return lambda X, Y: np.full_like(X, float(value))


def _gaussian(amp=1.0, x0=0.5, y0=0.5, width=0.1, base=1.0):
    return lambda X, Y: base + amp * np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (2.0 * width**2))


INITIAL_CONDITIONS = {
    "example1_p": lambda: _example1(+1.0),
    "example1_n": lambda: _example1(-1.0),
    "example2_p": lambda: _example2(0.8 * np.pi),
    "example2_n": lambda: _example2(1.2 * np.pi),
    "uniform": _uniform,
    "gaussian": _gaussian,
}


def initial_condition(grid: Grid, expr: str) -> Field:
    """Build a field from ``name`` or ``name:arg1:arg2...`` (e.g. ``uniform:3``)."""
    name, *args = expr.strip().split(":")
    try:
        factory = INITIAL_CONDITIONS[name]
    except KeyError:
        raise ValueError(f"unknown initial condition {name!r}; choose from {sorted(INITIAL_CONDITIONS)}") from None
    return Field.from_function(grid, factory(*(float(a) for a in args)))


# -- problems ------------------------------------------------------------

def _check_grid(n):
    if int(n) != n or n < 2:
        raise ValueError(f"grid size must be an integer >= 2, got {n}")
    return int(n)


def _two_species_periodic(n, p, q):
    grid = Grid(n, n, TWO_PI, TWO_PI)
    species = (
        SpeciesSpec("p", 1.0, 1.0, Field.from_function(grid, p)),
        SpeciesSpec("n", -1.0, 1.0, Field.from_function(grid, q)),
    )
    bc = BoundarySpec.periodic()
    return ProblemSpec(grid, species, eps=1.0, rho0=0.0, bc_mu=bc, bc_phi=bc)


def example1(n: int = 64) -> ProblemSpec:
    """Smooth two-species accuracy test on the periodic square ``[0, 2 pi]^2``."""
    n = _check_grid(n)
    return _two_species_periodic(n, _example1(+1.0), _example1(-1.0))


def example2(n: int = 64) -> ProblemSpec:
    """Two species with disparate initial data (min about 1e-6, max about 1.65)."""
    n = _check_grid(n)
    return _two_species_periodic(n, _example2(0.8 * np.pi), _example2(1.2 * np.pi))


def electrode_boundary(left, right, bottom, top) -> BoundarySpec:
    """Dirichlet data on the middle half of every edge of the unit square, zero flux elsewhere."""
    def edge(value):
        return (Segment("zeroflux", 0.0, 0.25), Segment("dirichlet", 0.25, 0.75, value=value),
                Segment("zeroflux", 0.75, 1.0))
    return BoundarySpec(edge(left), edge(right), edge(bottom), edge(top))


def _electrode_problem(n, species_def, bc_values, eps=0.01):
    grid = Grid(n, n, 1.0, 1.0)
    species = tuple(SpeciesSpec(name, z, D, Field.constant(grid, c0)) for name, z, D, c0 in species_def)
    phi_e = external_potential(bc_values, eps, grid)
    return ProblemSpec(grid, species, eps=eps, rho0=0.0, phi_e=phi_e,
                       bc_mu=BoundarySpec.zero_flux(), bc_phi=bc_values.homogeneous())


def example3_boundary(a: float) -> BoundarySpec:
    return electrode_boundary(
        left=lambda y: a * (y - 0.25),
        right=lambda y: a * (0.75 - y),
        bottom=lambda x: a * (x - 0.25),
        top=lambda x: a * (0.75 - x),
    )


def example3(a: float = 2.5, n: int = 32) -> ProblemSpec:
    """Two species on the unit square driven by ramp potentials on electrode segments."""
    n = _check_grid(n)
    return _electrode_problem(n, [("p", 1.0, 1.0, 1.0), ("n", -1.0, 1.0, 1.0)], example3_boundary(float(a)))


def example4(A: float = 1.0, n: int = 32) -> ProblemSpec:
    """Three species (z = 1, -1, 2) with constant electrode potentials -A (left/right) and A (bottom/top)."""
    n = _check_grid(n)
    A = float(A)
    bc = electrode_boundary(-A, -A, A, A)
    return _electrode_problem(
        n, [("c1", 1.0, 1.0, 1.0), ("c2", -1.0, 1.0, 3.0), ("c3", 2.0, 1.0, 1.0)], bc
    )


_DEFAULT_RUNS = {
    "example1": RunParams("bdf2", 1e-3, 0.1),
    "example2": RunParams("bdf2", 1e-3, 1.0),
    "example3": RunParams("be", 4e-3, 0.4),
    "example4": RunParams("be", 4e-3, 0.4),
}
PRESETS = tuple(_DEFAULT_RUNS)


def preset(name: str, *, a: float | None = None, A: float | None = None, n: int | None = None,
           dt: float | None = None, t_end: float | None = None, scheme: str | None = None):
    """Return ``(ProblemSpec, RunParams)`` for a named benchmark with optional overrides."""
    if name not in _DEFAULT_RUNS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    if a is not None and name != "example3":
        raise ValueError("override 'a' only applies to example3")
    if A is not None and name != "example4":
        raise ValueError("override 'A' only applies to example4")
    grid_kw = {} if n is None else {"n": n}
    if name == "example1":
        spec = example1(**grid_kw)
    elif name == "example2":
        spec = example2(**grid_kw)
    elif name == "example3":
        spec = example3(a=2.5 if a is None else a, **grid_kw)
    else:
        spec = example4(A=1.0 if A is None else A, **grid_kw)
    base = _DEFAULT_RUNS[name]
    params = RunParams(
        scheme=(scheme or base.scheme).lower(),
        dt=base.dt if dt is None else float(dt),
        t_end=base.t_end if t_end is None else float(t_end),
    )
    if params.scheme not in ("be", "bdf2"):
        raise ValueError(f"unknown scheme {params.scheme!r}")
    if not params.dt > 0 or not params.t_end > 0:
        raise ValueError("dt and t_end must be positive")
    return spec, params
