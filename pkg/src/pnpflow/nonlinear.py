"""Per-step nonlinear solve: Newton iteration with a positivity-preserving
backtracking line search and ILU(0)-preconditioned GMRES.

The unknown vector stacks every species concentration (flattened in C
order) followed by the internal potential, ``(N + 1) * nx * ny`` entries in
total. For both schemes the species residual reads

    a * (c_i - c_i*) - D_i div(m_i grad mu_i),   mu_i = log c_i + z_i (phi + phi_e)

with ``a = 1/dt, c* = c^n`` (backward Euler) or ``a = 3/(2 dt),
c* = (4 c^n - c^{n-1}) / 3`` (BDF2), and the potential residual is
``-div(eps grad phi) - rho0 - sum_i z_i c_i``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from pnpflow.errors import ConvergenceError, NewtonConvergenceError, PositivityError, StepRejectedError
from pnpflow.grid import Field
from pnpflow.linalg import gmres, preconditioner
from pnpflow.model import ProblemSpec, State
from pnpflow.operators import div_c_grad_matrix, laplacian_system

logger = logging.getLogger(__name__)

BE = "be"
BDF2 = "bdf2"

# residual level below which a failed line search counts as round-off stagnation
ROUNDOFF_RTOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-6
    newton_max_iters: int = 50
    gmres_tol: float = 1e-6
    gmres_restart: int = 50
    gmres_max_iters: int = 500
    linesearch_max_halvings: int = 40

    def __post_init__(self):
        for name in ("newton_tol", "gmres_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("newton_max_iters", "gmres_restart", "gmres_max_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.linesearch_max_halvings < 0:
            raise ValueError("linesearch_max_halvings must be non-negative")


@dataclass
class NewtonStats:
    iterations: int = 0
    gmres_iterations: list = field(default_factory=list)
    halvings: int = 0
    residual_history: list = field(default_factory=list)

    @property
    def gmres_max(self) -> int:
        return max(self.gmres_iterations, default=0)


class NonlinearSystem:
    """Discrete equations of one time step.

    Parameters
    ----------
    spec : ProblemSpec
    dt : float
    c_prev : sequence of arrays
        ``c^n`` for every species.
    mobility : sequence of arrays
        Frozen face-mobility sources (``c^n`` for BE, ``c_bar`` for BDF2).
    kind : {"be", "bdf2"}
    c_prev2 : sequence of arrays, optional
        ``c^{n-1}``; required for BDF2.
    """

    def __init__(self, spec: ProblemSpec, dt: float, c_prev, mobility, kind: str = BE, c_prev2=None):
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        if kind not in (BE, BDF2):
            raise ValueError(f"unknown scheme {kind!r}")
        grid = spec.grid
        self.spec = spec
        self.grid = grid
        self.dt = float(dt)
        self.kind = kind
        self.c_prev = [np.asarray(c, dtype=float).reshape(grid.shape) for c in c_prev]
        self.mobility = [np.asarray(m, dtype=float).reshape(grid.shape) for m in mobility]
        for i, m in enumerate(self.mobility):
            if not np.all(m > 0):
                raise PositivityError(f"mobility of species {i} must be positive (min {m.min():.3e})")
        if kind == BE:
            self.time_coeff = 1.0 / self.dt
            self.c_star = [c.ravel().copy() for c in self.c_prev]
        else:
            if c_prev2 is None:
                raise ValueError("BDF2 needs the state two levels back")
            self.c_prev2 = [np.asarray(c, dtype=float).reshape(grid.shape) for c in c_prev2]
            self.time_coeff = 1.5 / self.dt
            self.c_star = [(4.0 * c1.ravel() - c0.ravel()) / 3.0 for c1, c0 in zip(self.c_prev, self.c_prev2)]
        self.z = spec.z
        self.n = grid.size
        self.nspec = spec.n_species
        self.G = [div_c_grad_matrix(grid, m, spec.bc_mu, s.D) for m, s in zip(self.mobility, spec.species)]
        self.L, self.L_shift = laplacian_system(grid, spec.eps, spec.bc_phi)
        self.phi_e = spec.phi_e.flat.copy()
        self.singular = spec.bc_phi.is_singular

    @property
    def size(self) -> int:
        return (self.nspec + 1) * self.n

    # -- vector layout ------------------------------------------------
    def pack(self, state: State) -> np.ndarray:
        return np.concatenate([c.flat for c in state.c] + [state.phi.flat])

    def unpack(self, x: np.ndarray):
        n = self.n
        cs = [x[i * n:(i + 1) * n] for i in range(self.nspec)]
        return cs, x[self.nspec * n:]

    def to_state(self, x: np.ndarray, t: float = 0.0) -> State:
        cs, phi = self.unpack(x)
        g = self.grid
        return State(tuple(Field(g, c.reshape(g.shape)) for c in cs), Field(g, phi.reshape(g.shape)), t)

    # -- equations ----------------------------------------------------
    def residual_vector(self, x: np.ndarray) -> np.ndarray:
        cs, phi = self.unpack(x)
        for i, c in enumerate(cs):
            if not np.all(c > 0):
                raise PositivityError(f"species {i}: nonpositive concentration {c.min():.3e}")
        out = np.empty_like(x)
        n = self.n
        pot = phi + self.phi_e
        rho = np.full(n, float(self.spec.rho0))
        for i, c in enumerate(cs):
            mu = np.log(c) + self.z[i] * pot
            out[i * n:(i + 1) * n] = self.time_coeff * (c - self.c_star[i]) - self.G[i] @ mu
            rho += self.z[i] * c
        out[self.nspec * n:] = self.L @ phi + self.L_shift - rho
        return out

    def jacobian_matrix(self, x: np.ndarray) -> sp.csr_matrix:
        cs, _ = self.unpack(x)
        N = self.nspec
        eye = sp.identity(self.n, format="csr")
        blocks = [[None] * (N + 1) for _ in range(N + 1)]
        for i, c in enumerate(cs):
            if not np.all(c > 0):
                raise PositivityError(f"species {i}: nonpositive concentration {c.min():.3e}")
            blocks[i][i] = self.time_coeff * eye - self.G[i] @ sp.diags(1.0 / c)
            if self.z[i] != 0.0:
                blocks[i][N] = -self.z[i] * self.G[i]
                blocks[N][i] = -self.z[i] * eye
        blocks[N][N] = self.L
        J = sp.bmat(blocks, format="csr")
        J.sort_indices()
        return J


def residual(sys: NonlinearSystem, guess: State) -> np.ndarray:
    """Residual of the step equations at ``guess`` (species blocks, then potential)."""
    return sys.residual_vector(sys.pack(guess))


def jacobian(sys: NonlinearSystem, guess: State) -> sp.csr_matrix:
    """Analytic Jacobian of :func:`residual` at ``guess``."""
    return sys.jacobian_matrix(sys.pack(guess))


def _pin(J: sp.csr_matrix, row: int):
    """Replace ``row`` by the identity row (fixes the additive constant of phi)."""
    J = J.copy()
    lo, hi = J.indptr[row], J.indptr[row + 1]
    J.data[lo:hi] = 0.0
    cols = J.indices[lo:hi]
    J.data[lo + int(np.flatnonzero(cols == row)[0])] = 1.0
    return J


def newton_solve(sys: NonlinearSystem, initial: State, cfg: SolverConfig = SolverConfig()):
    """Solve the step equations by damped Newton iteration.

    The Newton direction comes from GMRES with an ILU(0) preconditioner and is
    projected so that every species keeps its discrete mass. The step length
    starts at 1 and is halved until all concentrations are positive and the
    residual 2-norm strictly decreases.

    Returns
    -------
    state : State
        Converged solution (time stamp copied from ``initial``).
    stats : NewtonStats
    """
    x = sys.pack(initial)
    r = sys.residual_vector(x)
    rnorm = float(np.linalg.norm(r))
    target = cfg.newton_tol * max(1.0, rnorm)
    stats = NewtonStats(residual_history=[rnorm])
    n, N = sys.n, sys.nspec
    pin_row = N * n if sys.singular else None

    while rnorm > target:
        if stats.iterations >= cfg.newton_max_iters:
            raise NewtonConvergenceError(
                f"Newton: residual {rnorm:.3e} > {target:.3e} after {stats.iterations} iterations",
                x=x, history=stats.residual_history, stats=stats,
            )
        J = sys.jacobian_matrix(x)
        rhs = -r
        if pin_row is not None:
            J = _pin(J, pin_row)
            rhs[pin_row] = 0.0
        M = preconditioner(J)
        try:
            dx, info = gmres(J, rhs, M, tol=cfg.gmres_tol, restart=cfg.gmres_restart, maxiter=cfg.gmres_max_iters)
            stats.gmres_iterations.append(info["iterations"])
        except ConvergenceError as exc:
            logger.warning("%s; using best iterate", exc)
            dx = exc.x
            stats.gmres_iterations.append(cfg.gmres_max_iters)
        for i in range(N):
            blk = dx[i * n:(i + 1) * n]
            blk -= blk.mean()
        if sys.singular:
            blk = dx[N * n:]
            blk -= blk.mean()

        step = 1.0
        accepted = False
        for _ in range(cfg.linesearch_max_halvings + 1):
            cand = x + step * dx
            if all(np.all(cand[i * n:(i + 1) * n] > 0) for i in range(N)):
                rc = sys.residual_vector(cand)
                rc_norm = float(np.linalg.norm(rc))
                if rc_norm < rnorm:
                    accepted = True
                    break
            step *= 0.5
            stats.halvings += 1
        if not accepted:
            stats.halvings -= 1
            if rnorm <= ROUNDOFF_RTOL * max(1.0, stats.residual_history[0]):
                logger.debug("Newton stalled at round-off level %.3e; accepting", rnorm)
                break
            raise StepRejectedError(
                f"line search failed after {cfg.linesearch_max_halvings} halvings (residual {rnorm:.3e})",
                x=x, history=stats.residual_history, stats=stats,
            )
        x, r, rnorm = cand, rc, rc_norm
        stats.iterations += 1
        stats.residual_history.append(rnorm)

    return replace(sys.to_state(x), t=initial.t), stats
