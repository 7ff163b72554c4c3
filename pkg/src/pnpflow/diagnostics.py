"""Observables and invariant monitors for PNP trajectories."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pnpflow.errors import PositivityError
from pnpflow.grid import Field, inner
from pnpflow.model import ProblemSpec, State, charge_density, chemical_potential
from pnpflow.operators import mobility_form, potential_form

logger = logging.getLogger(__name__)


def total_mass(c: Field) -> float:
    return inner(c, Field.constant(c.grid, 1.0))


def extrema(c: Field) -> tuple:
    return c.min(), c.max()


def discrete_energy(state: State, spec: ProblemSpec) -> float:
    """Cell-weighted ``sum_i c_i (log c_i - 1) + rho (phi/2 + phi_e)``."""
    total = 0.0
    for c in state.c:
        v = c.values
        if np.any(v <= 0):
            raise PositivityError(f"energy needs positive concentrations (min {v.min():.3e})")
        total += float(np.sum(v * (np.log(v) - 1.0)))
    rho = charge_density(state, spec).values
    total += float(np.sum(rho * (0.5 * state.phi.values + spec.phi_e.values)))
    return spec.grid.cell_area * total


def dissipation_functional(state_next: State, mobility, spec: ProblemSpec) -> float:
    """``sum_i D_i sum_faces m_face |grad mu_i|^2`` (cell weighted, always >= 0).

    ``mobility`` holds the frozen face-mobility sources used in the step
    (``c^n`` for backward Euler, the extrapolation for BDF2).
    """
    total = 0.0
    for s, c, m in zip(spec.species, state_next.c, mobility):
        mu = chemical_potential(c, state_next.phi, spec.phi_e, s.z)
        mvals = m.values if isinstance(m, Field) else np.asarray(m)
        total += mobility_form(spec.grid, mvals, mu.values, spec.bc_mu, s.D)
    return total


def electrostatic_energy_grad(state: State, spec: ProblemSpec) -> float:
    """``1/2 sum_faces eps |grad phi|^2`` from face differences, boundary faces included."""
    return 0.5 * potential_form(spec.grid, spec.eps, state.phi.values, spec.bc_phi.homogeneous())


def electrostatic_energy_charge(state: State, spec: ProblemSpec) -> float:
    """``inner(phi + phi_e, sum_i z_i c_i)``: the charge-potential form used for mixed boundaries."""
    q = np.zeros(spec.grid.shape)
    for s, c in zip(spec.species, state.c):
        q += s.z * c.values
    return float(spec.grid.cell_area * np.sum((state.phi.values + spec.phi_e.values) * q))


@dataclass(frozen=True)
class StepReport:
    step: int
    t: float
    masses: tuple
    energy: float
    electro_grad: float
    electro_charge: float
    mins: tuple
    maxs: tuple
    newton_iters: int = 0
    gmres_max: int = 0
    halvings: int = 0
    dissipation_slack: float = float("nan")

    @staticmethod
    def header(n_species: int) -> list:
        return (
            ["step", "t"]
            + [f"mass_{i + 1}" for i in range(n_species)]
            + ["energy", "electro_grad", "electro_charge"]
            + [f"min_{i + 1}" for i in range(n_species)]
            + [f"max_{i + 1}" for i in range(n_species)]
            + ["newton_iters", "gmres_max", "halvings", "dissipation_slack"]
        )

    def row(self) -> list:
        return (
            [self.step, self.t]
            + list(self.masses)
            + [self.energy, self.electro_grad, self.electro_charge]
            + list(self.mins)
            + list(self.maxs)
            + [self.newton_iters, self.gmres_max, self.halvings, self.dissipation_slack]
        )


def make_report(step: int, state: State, spec: ProblemSpec, *, stats=None, prev_energy=None,
                mobility=None, dt=None) -> StepReport:
    energy = discrete_energy(state, spec)
    slack = float("nan")
    if prev_energy is not None and mobility is not None:
        slack = (energy - prev_energy) + dt * dissipation_functional(state, mobility, spec)
    ext = [extrema(c) for c in state.c]
    return StepReport(
        step=step,
        t=state.t,
        masses=tuple(total_mass(c) for c in state.c),
        energy=energy,
        electro_grad=electrostatic_energy_grad(state, spec),
        electro_charge=electrostatic_energy_charge(state, spec),
        mins=tuple(e[0] for e in ext),
        maxs=tuple(e[1] for e in ext),
        newton_iters=stats.iterations if stats else 0,
        gmres_max=stats.gmres_max if stats else 0,
        halvings=stats.halvings if stats else 0,
        dissipation_slack=slack,
    )


# -- monitors -----------------------------------------------------------

def has_two_component_structure(spec: ProblemSpec) -> bool:
    """Equal-diffusivity +1/-1 pair with no external field and flux/periodic potential BCs."""
    return (
        spec.n_species == 2
        and sorted(spec.z.tolist()) == [-1.0, 1.0]
        and spec.species[0].D == spec.species[1].D
        and not np.any(spec.phi_e.values)
        and spec.bc_phi.is_singular
    )


def monotone_violations(values, slack: float = 1e-8, relative: bool = True) -> list:
    """Indices ``k`` where ``values[k] > values[k-1] + slack * (1 + |values[k-1]|)``."""
    out = []
    for k in range(1, len(values)):
        tol = slack * (1.0 + abs(values[k - 1])) if relative else slack
        if values[k] > values[k - 1] + tol:
            out.append(k)
    return out


def max_principle_violations(initial: StepReport, reports, tol: float = 1e-6) -> list:
    """Steps whose extrema leave ``(0, initial max + tol]``."""
    upper = max(initial.maxs) + tol
    return [r.step for r in reports if max(r.maxs) > upper or min(r.mins) <= 0.0]


def monitor(spec: ProblemSpec, initial: StepReport, reports) -> list:
    """Run the soft checks and log a warning for each failure. Returns the messages."""
    msgs = []
    energies = [initial.energy] + [r.energy for r in reports]
    bad = monotone_violations(energies)
    if bad:
        msgs.append(f"total energy increased at steps {bad[:10]}")
    if has_two_component_structure(spec):
        bad = max_principle_violations(initial, reports)
        if bad:
            msgs.append(f"maximum principle violated at steps {bad[:10]}")
        bad = monotone_violations([initial.electro_grad] + [r.electro_grad for r in reports])
        if bad:
            msgs.append(f"electrostatic energy increased at steps {bad[:10]}")
    for m in msgs:
        logger.warning(m)
    return msgs
