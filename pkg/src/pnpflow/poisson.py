"""Linear solves of the discrete Poisson problem ``-div(eps grad phi) = rhs``."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from pnpflow.boundary import KIND_CODE, BoundarySpec
from pnpflow.errors import CompatibilityError, SingularProblemError, ZeroPivotError
from pnpflow.grid import Field, Grid
from pnpflow.linalg import ILU0, Jacobi, pcg
from pnpflow.operators import boundary_faces, laplacian_system

RTOL = 1e-10
ATOL = 1e-14
COMPAT_TOL = 1e-10


def _spd_preconditioner(L: sp.csr_matrix):
    try:
        return ILU0(L)
    except ZeroPivotError:
        # singular operators can lose their last pivot; a tiny diagonal shift restores it
        d = L.diagonal()
        try:
            return ILU0(L + sp.diags(1e-6 * d, format="csr"))
        except ZeroPivotError:
            return Jacobi(L)


def _solve(grid: Grid, eps: float, bc: BoundarySpec, rhs: np.ndarray) -> np.ndarray:
    L, g = laplacian_system(grid, eps, bc)
    b = rhs - g
    singular = bc.is_singular
    if singular:
        rnorm = float(np.sqrt(grid.cell_area * np.sum(rhs**2)))
        total = grid.cell_area * float(np.sum(b))
        if abs(total) > COMPAT_TOL * (rnorm + 1.0):
            raise CompatibilityError(
                f"right-hand side integrates to {total:.3e}; pure Neumann/periodic problems need zero mean"
            )
    scale = max(float(np.linalg.norm(rhs)), float(np.linalg.norm(b)))
    x, _ = pcg(L, b, M=_spd_preconditioner(L), tol=0.0, atol=max(RTOL * scale, ATOL), project_mean=singular)
    return x


def solve_poisson(rhs: Field, eps: float, bc: BoundarySpec) -> Field:
    """Solve ``-div(eps grad phi) = rhs`` with the boundary conditions ``bc``.

    For pure Neumann/periodic conditions the right-hand side must have zero
    mean and the returned potential has zero mean.

    Raises
    ------
    CompatibilityError
        Singular problem with a right-hand side of nonzero mean.
    ConvergenceError
        CG did not reach ``1e-10`` relative residual.
    """
    return Field(rhs.grid, _solve(rhs.grid, eps, bc, rhs.flat).reshape(rhs.grid.shape))


def external_potential(bc_values: BoundarySpec, eps: float, grid: Grid) -> Field:
    """Harmonic potential matching the Dirichlet data of ``bc_values``."""
    bf = boundary_faces(grid, bc_values)
    if not np.any(bf["kind"] == KIND_CODE["dirichlet"]):
        raise SingularProblemError("external potential needs at least one Dirichlet boundary face")
    return Field(grid, _solve(grid, eps, bc_values, np.zeros(grid.size)).reshape(grid.shape))


def boundary_midpoint_values(phi: Field, bc: BoundarySpec, edge: str) -> np.ndarray:
    """Face-midpoint values ``(ghost + interior)/2`` along one edge."""
    grid = phi.grid
    faces = bc.edge_faces(grid, edge)
    interior = {"left": phi.values[0, :], "right": phi.values[-1, :],
                "bottom": phi.values[:, 0], "top": phi.values[:, -1]}[edge]
    ghost = interior.copy()
    dmask = faces.kind == KIND_CODE["dirichlet"]
    ghost[dmask] = 2.0 * faces.value[dmask] - interior[dmask]
    return 0.5 * (ghost + interior)
