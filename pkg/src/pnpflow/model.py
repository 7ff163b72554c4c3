"""Problem definition for N-species PNP systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pnpflow.boundary import DIRICHLET, EDGES, BoundarySpec
from pnpflow.errors import PositivityError
from pnpflow.grid import Field, Grid

NEUTRALITY_TOL = 1e-12


@dataclass(frozen=True)
class SpeciesSpec:
    name: str
    z: float
    D: float
    c0: Field


@dataclass(frozen=True)
class ProblemSpec:
    """Everything that defines a PNP problem apart from the time stepping.

    ``bc_phi`` governs the internal potential and should carry homogeneous
    data; inhomogeneous boundary potentials belong in ``phi_e`` (see
    :func:`pnpflow.poisson.external_potential`).
    """

    grid: Grid
    species: tuple
    eps: float = 1.0
    rho0: float = 0.0
    phi_e: Field | None = None
    bc_mu: BoundarySpec = field(default_factory=BoundarySpec.zero_flux)
    bc_phi: BoundarySpec = field(default_factory=BoundarySpec.zero_flux)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        if self.phi_e is None:
            object.__setattr__(self, "phi_e", Field.constant(self.grid, 0.0))

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def z(self) -> np.ndarray:
        return np.array([s.z for s in self.species], dtype=float)

    @property
    def D(self) -> np.ndarray:
        return np.array([s.D for s in self.species], dtype=float)

    @property
    def names(self) -> list:
        return [s.name for s in self.species]


@dataclass(frozen=True)
class State:
    """Snapshot of all concentrations and the internal potential at time ``t``."""

    c: tuple
    phi: Field
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(self.c))

    @property
    def grid(self) -> Grid:
        return self.phi.grid


def validate(spec: ProblemSpec) -> list:
    """Collect every violated problem invariant.

    Returns an empty list when the problem is usable. Never raises for
    problems it can describe.
    """
    errors = []
    grid = spec.grid
    if not spec.species:
        errors.append("at least one species is required")
    names = [s.name for s in spec.species]
    if len(set(names)) != len(names):
        errors.append(f"species names must be unique: {names}")
    for s in spec.species:
        if not s.D > 0:
            errors.append(f"species {s.name!r}: diffusivity must be positive (got {s.D})")
        if not np.isfinite(s.z):
            errors.append(f"species {s.name!r}: valence must be finite")
        if s.c0.grid != grid:
            errors.append(f"species {s.name!r}: initial field is on a different grid")
        elif np.any(s.c0.values <= 0):
            errors.append(f"species {s.name!r}: initial concentration must be positive (min {s.c0.min():.3e})")
    if not spec.eps > 0:
        errors.append(f"permittivity must be positive (got {spec.eps})")
    if spec.phi_e.grid != grid:
        errors.append("external potential is on a different grid")

    for label, bc in (("bc_mu", spec.bc_mu), ("bc_phi", spec.bc_phi)):
        errors.extend(f"{label}: {msg}" for msg in bc.validate(grid))
    bad_mu = spec.bc_mu.kinds() - {"periodic", "zeroflux"}
    if bad_mu:
        errors.append(f"bc_mu: only periodic/zero-flux conditions are allowed (got {sorted(bad_mu)})")
    for edge in EDGES:
        for seg in spec.bc_phi.segments(edge):
            if seg.kind == DIRICHLET and (callable(seg.value) or seg.value != 0.0):
                errors.append(f"bc_phi: {edge} Dirichlet data must be homogeneous; put boundary potentials in phi_e")
                break
    for axis, pair in enumerate((("left", "right"), ("bottom", "top"))):
        if spec.bc_mu.is_periodic(axis) != spec.bc_phi.is_periodic(axis):
            errors.append(f"{pair[0]}/{pair[1]}: periodicity of bc_mu and bc_phi must agree")

    if spec.bc_phi.is_singular and spec.species and all(s.c0.grid == grid for s in spec.species):
        net = spec.rho0 + sum(s.z * float(np.mean(s.c0.values)) for s in spec.species)
        if abs(net) >= NEUTRALITY_TOL:
            errors.append(f"electroneutrality violated: rho0 + sum z_i mean(c0_i) = {net:.3e}")
    return errors


def chemical_potential(c: Field, phi: Field, phi_e: Field, z: float) -> Field:
    """Nodewise ``log c + z (phi + phi_e)``."""
    if np.any(c.values <= 0):
        raise PositivityError(f"chemical potential needs c > 0 (min {c.min():.3e})")
    return Field(c.grid, np.log(c.values) + z * (phi.values + phi_e.values))


def charge_density(state: State, spec: ProblemSpec) -> Field:
    """Nodewise ``rho0 + sum_i z_i c_i``."""
    rho = np.full(spec.grid.shape, float(spec.rho0))
    for s, c in zip(spec.species, state.c):
        rho = rho + s.z * c.values
    return Field(spec.grid, rho)


def initial_state(spec: ProblemSpec) -> State:
    """State at ``t = 0``: the given concentrations and the Poisson potential they induce."""
    from pnpflow.poisson import solve_poisson

    c = tuple(s.c0 for s in spec.species)
    rho = charge_density(State(c, Field.constant(spec.grid, 0.0)), spec)
    phi = solve_poisson(rho, spec.eps, spec.bc_phi)
    return State(c, phi, 0.0)


def species_from(names: Sequence[str], z, D, c0) -> tuple:
    return tuple(SpeciesSpec(n, float(zi), float(Di), ci) for n, zi, Di, ci in zip(names, z, D, c0))
