import numpy as np
import pytest

from pnpflow import BoundarySpec, Field, Grid, ProblemSpec, Segment, SpeciesSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def neutral_pair(grid, bc=None, p=None, n=None, eps=1.0):
    """Two species z = +-1 on ``grid``; defaults to the uniform state p = n = 1."""
    bc = bc or BoundarySpec.periodic()
    p = Field.constant(grid, 1.0) if p is None else p
    n = Field.constant(grid, 1.0) if n is None else n
    return ProblemSpec(grid, (SpeciesSpec("p", 1.0, 1.0, p), SpeciesSpec("n", -1.0, 1.0, n)),
                       eps=eps, bc_mu=bc, bc_phi=bc)


@pytest.fixture
def small_periodic():
    return Grid(4, 4, 1.0, 1.0)


def fd_jacobian(sys, x, h=1e-7):
    """Central-difference Jacobian of ``sys.residual_vector`` at ``x`` (dense)."""
    J = np.empty((x.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        step = h * max(1.0, abs(x[j]))
        e[j] = step
        J[:, j] = (sys.residual_vector(x + e) - sys.residual_vector(x - e)) / (2 * step)
    return J


def relative_entry_error(J_exact, J_fd):
    """Largest entrywise error relative to ``max(|J_ij|, 1)``."""
    return float(np.max(np.abs(J_exact - J_fd) / np.maximum(np.abs(J_exact), 1.0)))


BC_CASES = {
    "periodic": (BoundarySpec.periodic(), BoundarySpec.periodic()),
    "zeroflux": (BoundarySpec.zero_flux(), BoundarySpec.zero_flux()),
    "dirichlet": (BoundarySpec.zero_flux(), BoundarySpec.dirichlet(0.0)),
    "robin": (BoundarySpec.zero_flux(), BoundarySpec.robin(2.0, 0.5)),
    "mixed": (BoundarySpec.zero_flux(), BoundarySpec.zero_flux().with_edge(
        "left", (Segment("zeroflux", 0.0, 0.5), Segment("dirichlet", 0.5, 1.0))).with_edge(
        "top", (Segment("robin", 0.0, 0.5, alpha=1.0, beta=1.0), Segment("zeroflux", 0.5, 1.0)))),
}


def random_system(rng, bc_name, n=(4, 4), z=(1.0, -1.0), kind="be", dt=None):
    """A step system with random positive data, a random potential and random guess."""
    from pnpflow.nonlinear import NonlinearSystem

    bc_mu, bc_phi = BC_CASES[bc_name]
    grid = Grid(*n, 1.0, 1.0)
    species = tuple(SpeciesSpec(f"s{i}", zi, rng.uniform(0.5, 2.0), Field(grid, rng.uniform(0.5, 2.0, grid.shape)))
                    for i, zi in enumerate(z))
    phi_e = Field(grid, rng.normal(scale=0.3, size=grid.shape))
    spec = ProblemSpec(grid, species, eps=rng.uniform(0.05, 1.0), rho0=rng.normal(scale=0.1), phi_e=phi_e,
                       bc_mu=bc_mu, bc_phi=bc_phi)
    dt = dt or rng.uniform(1e-3, 1e-1)
    cn = [rng.uniform(0.3, 2.0, grid.shape) for _ in z]
    if kind == "be":
        sys = NonlinearSystem(spec, dt, cn, cn)
    else:
        cnm1 = [rng.uniform(0.3, 2.0, grid.shape) for _ in z]
        mob = [rng.uniform(0.3, 2.0, grid.shape) for _ in z]
        sys = NonlinearSystem(spec, dt, cn, mob, kind="bdf2", c_prev2=cnm1)
    x = np.concatenate([rng.uniform(0.3, 2.0, grid.size) for _ in z] + [rng.normal(size=grid.size)])
    return sys, x
