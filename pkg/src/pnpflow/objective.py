"""Strictly convex functional whose constrained minimizer is the step solution.

Dense and meant for small grids only: it is an independent check on the
Newton solver, not part of the production path. With ``B = hx*hy*I``, the
mobility stiffness ``A_i = -B G_i`` and the Poisson stiffness ``A = B L``,

    F(c) = sum_i a/2 (c_i - c_i*)^T B A_i^+ B (c_i - c_i*)
         + sum_i c_i^T B (log c_i - 1)
         + 1/2 rho^T B A^+ B rho + phi_e^T B rho,   rho = rho0 + sum_i z_i c_i

where ``A^+`` are eigen-decomposition pseudo-inverses.
"""

from __future__ import annotations

import numpy as np

from pnpflow.errors import PositivityError
from pnpflow.nonlinear import NonlinearSystem

MAX_UNKNOWNS = 4096
EIG_CUTOFF = 1e-12
MASS_RTOL = 1e-10


def pseudo_inverse(A: np.ndarray) -> np.ndarray:
    """Symmetric pseudo-inverse dropping eigenvalues below ``1e-12 * max``."""
    A = 0.5 * (A + A.T)
    lam, T = np.linalg.eigh(A)
    cut = EIG_CUTOFF * np.max(np.abs(lam))
    inv = np.zeros_like(lam)
    keep = np.abs(lam) > cut
    inv[keep] = 1.0 / lam[keep]
    return (T * inv) @ T.T


class ConvexObjective:
    def __init__(self, sys: NonlinearSystem):
        if sys.size > MAX_UNKNOWNS:
            raise ValueError(f"dense objective limited to {MAX_UNKNOWNS} unknowns, system has {sys.size}")
        self.sys = sys
        self.area = sys.grid.cell_area
        B = self.area
        self.K = [B * pseudo_inverse(-B * G.toarray()) * B for G in sys.G]
        self.P = B * pseudo_inverse(B * sys.L.toarray()) * B
        self.c_star = [c.copy() for c in sys.c_star]
        self.a = sys.time_coeff
        self.z = sys.z
        self.rho0 = float(sys.spec.rho0)
        self.phi_e = sys.phi_e

    def _rho(self, cs):
        rho = np.full(self.sys.n, self.rho0)
        for zi, c in zip(self.z, cs):
            rho = rho + zi * c
        return rho

    def value(self, cs) -> float:
        cs = [np.asarray(c, dtype=float).ravel() for c in cs]
        if any(np.any(c <= 0) for c in cs):
            raise PositivityError("objective is defined for positive concentrations only")
        B = self.area
        total = 0.0
        for K, c, cst in zip(self.K, cs, self.c_star):
            d = c - cst
            total += 0.5 * self.a * d @ (K @ d)
            total += B * np.sum(c * (np.log(c) - 1.0))
        rho = self._rho(cs)
        total += 0.5 * rho @ (self.P @ rho) + B * self.phi_e @ rho
        return float(total)

    def gradient(self, cs, project: bool = True):
        cs = [np.asarray(c, dtype=float).ravel() for c in cs]
        B = self.area
        field_term = self.P @ self._rho(cs) + B * self.phi_e
        grads = []
        for K, c, cst, zi in zip(self.K, cs, self.c_star, self.z):
            g = self.a * (K @ (c - cst)) + B * np.log(c) + zi * field_term
            grads.append(g - g.mean() if project else g)
        return grads


def objective(sys: NonlinearSystem, candidate) -> float:
    """Evaluate the step functional at ``candidate`` concentrations.

    The candidate must be positive and keep every species' discrete mass.
    """
    cs = [np.asarray(c, dtype=float).ravel() for c in candidate]
    for i, (c, c0) in enumerate(zip(cs, sys.c_prev)):
        m, m0 = c.sum(), c0.sum()
        if abs(m - m0) > MASS_RTOL * abs(m0):
            raise ValueError(f"species {i}: candidate mass {m:.15g} differs from {m0:.15g}")
    return ConvexObjective(sys).value(cs)


def minimize_objective(sys: NonlinearSystem, start=None, max_iter: int = 100_000, gtol: float = 1e-12):
    """Projected gradient descent with step halving on the step functional.

    Independent of the Newton path: uses only function values and the
    mass-projected gradient. Returns ``(concentrations, iterations)``.
    """
    F = ConvexObjective(sys)
    x = [np.asarray(c, dtype=float).ravel().copy() for c in (start if start is not None else sys.c_prev)]
    f = F.value(x)
    g = F.gradient(x)
    gsq = sum(float(gi @ gi) for gi in g)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        if np.sqrt(gsq) < gtol:
            break
        while step > 1e-300:
            cand = [xi - step * gi for xi, gi in zip(x, g)]
            if all(np.all(c > 0) for c in cand):
                fc = F.value(cand)
                if fc <= f - 1e-4 * step * gsq:
                    break
                # round-off floor: accept flat steps that still shrink the gradient
                if abs(fc - f) <= 1e-13 * max(1.0, abs(f)):
                    gc = F.gradient(cand)
                    if sum(float(gi @ gi) for gi in gc) < gsq:
                        break
            step *= 0.5
        else:
            break
        x = cand
        f = fc
        g = F.gradient(x)
        gsq = sum(float(gi @ gi) for gi in g)
        step *= 2.0
    return [xi.reshape(sys.grid.shape) for xi in x], it
