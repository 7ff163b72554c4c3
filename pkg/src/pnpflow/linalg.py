"""Sparse linear algebra: ILU(0), Jacobi, restarted GMRES and deflated PCG.

Matrices are ``scipy.sparse.csr_matrix`` with sorted column indices. The
ILU(0) kernels are compiled with numba; everything else is numpy.
"""

from __future__ import annotations

import logging

import numba
import numpy as np
import scipy.sparse as sp

from pnpflow.errors import ConvergenceError, ZeroPivotError

logger = logging.getLogger(__name__)

PIVOT_RTOL = 1e-12


@numba.njit(cache=True)
def _ilu0_factor(indptr, indices, data, diag_pos, rtol):
    n = indptr.size - 1
    pos = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        start, end = indptr[i], indptr[i + 1]
        scale = 0.0
        for p in range(start, end):
            pos[indices[p]] = p
            a = abs(data[p])
            if a > scale:
                scale = a
        for p in range(start, end):
            k = indices[p]
            if k >= i:
                break
            data[p] /= data[diag_pos[k]]
            lik = data[p]
            for q in range(diag_pos[k] + 1, indptr[k + 1]):
                t = pos[indices[q]]
                if t != -1:
                    data[t] -= lik * data[q]
        d = data[diag_pos[i]]
        for p in range(start, end):
            pos[indices[p]] = -1
        if not abs(d) > rtol * scale:
            return i
    return -1


@numba.njit(cache=True)
def _ilu0_solve(indptr, indices, data, diag_pos, b):
    n = b.size
    x = b.copy()
    for i in range(n):
        s = x[i]
        for p in range(indptr[i], diag_pos[i]):
            s -= data[p] * x[indices[p]]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        for p in range(diag_pos[i] + 1, indptr[i + 1]):
            s -= data[p] * x[indices[p]]
        x[i] = s / data[diag_pos[i]]
    return x


def _csr(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A, dtype=float, copy=True)
    A.sum_duplicates()
    A.sort_indices()
    return A


class ILU0:
    """Incomplete LU factorization with the sparsity pattern of ``A``.

    ``L`` (unit lower) and ``U`` share one CSR array, exactly as in the
    classic IKJ formulation. Raises :class:`ZeroPivotError` when a pivot is
    missing or numerically zero.
    """

    def __init__(self, A):
        A = _csr(A)
        n, m = A.shape
        if n != m:
            raise ValueError(f"ILU(0) needs a square matrix, got {A.shape}")
        indptr = A.indptr.astype(np.int64)
        indices = A.indices.astype(np.int64)
        diag_pos = np.full(n, -1, dtype=np.int64)
        rows = np.repeat(np.arange(n), np.diff(indptr))
        on_diag = np.flatnonzero(rows == indices)
        diag_pos[rows[on_diag]] = on_diag
        missing = np.flatnonzero(diag_pos < 0)
        if missing.size:
            raise ZeroPivotError(f"ILU(0): structurally zero diagonal in row {missing[0]}")
        data = A.data.copy()
        bad = _ilu0_factor(indptr, indices, data, diag_pos, PIVOT_RTOL)
        if bad >= 0:
            raise ZeroPivotError(f"ILU(0): zero pivot in row {bad}")
        self.shape = A.shape
        self._indptr, self._indices, self._data, self._diag = indptr, indices, data, diag_pos

    def solve(self, b: np.ndarray) -> np.ndarray:
        return _ilu0_solve(self._indptr, self._indices, self._data, self._diag, np.ascontiguousarray(b, dtype=float))

    __call__ = solve

    def factors(self):
        """Return ``(L, U)`` as CSR matrices (for inspection and tests)."""
        n = self.shape[0]
        M = sp.csr_matrix((self._data, self._indices, self._indptr), shape=self.shape)
        L = sp.tril(M, k=-1, format="csr") + sp.identity(n, format="csr")
        U = sp.triu(M, k=0, format="csr")
        return L.tocsr(), U.tocsr()


class Jacobi:
    """Diagonal preconditioner."""

    def __init__(self, A):
        d = np.asarray(sp.csr_matrix(A).diagonal(), dtype=float)
        if np.any(d == 0):
            raise ZeroPivotError("Jacobi: zero diagonal entry")
        self.shape = (d.size, d.size)
        self._inv = 1.0 / d

    def solve(self, b):
        return self._inv * b

    __call__ = solve


def ilu0(A) -> ILU0:
    return ILU0(A)


def preconditioner(A):
    """ILU(0) of ``A``, falling back to Jacobi on a zero pivot."""
    try:
        return ILU0(A)
    except ZeroPivotError as exc:
        logger.warning("%s; falling back to Jacobi preconditioning", exc)
        return Jacobi(A)


def _identity(v):
    return v


def gmres(A, b, M=None, tol=1e-6, restart=50, maxiter=500, x0=None):
    """Right-preconditioned restarted GMRES.

    Stops once ``||b - A x|| <= tol * ||b||``.

    Parameters
    ----------
    A : sparse matrix or object with ``@``
    b : ndarray
    M : callable, optional
        Applies the preconditioner inverse, ``z = M(r)``.
    tol : float
        Relative residual tolerance.
    restart : int
        Krylov subspace dimension per cycle.
    maxiter : int
        Cap on the total number of inner iterations (matrix-vector products).

    Returns
    -------
    x : ndarray
    info : dict
        ``iterations``, ``residual`` (final true residual norm) and
        ``history`` (estimated residual norm after every inner iteration).

    Raises
    ------
    ConvergenceError
        ``maxiter`` reached; carries the best iterate and residual history.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if A.shape != (n, n):
        raise ValueError(f"dimension mismatch: A {A.shape}, b {b.shape}")
    apply_M = _identity if M is None else (M.solve if hasattr(M, "solve") else M)
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros(n), {"iterations": 0, "residual": 0.0, "history": []}
    target = tol * bnorm
    r = b - A @ x
    beta = float(np.linalg.norm(r))
    history = [beta]
    total = 0
    m = max(1, min(restart, n))
    while beta > target and total < maxiter:
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        V[0] = r / beta
        g[0] = beta
        k = 0
        for j in range(m):
            w = A @ apply_M(V[j])
            total += 1
            # classical Gram-Schmidt, applied twice
            h = V[: j + 1] @ w
            w = w - V[: j + 1].T @ h
            h2 = V[: j + 1] @ w
            w = w - V[: j + 1].T @ h2
            h = h + h2
            hn = float(np.linalg.norm(w))
            H[: j + 1, j] = h
            H[j + 1, j] = hn
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = np.hypot(H[j, j], H[j + 1, j])
            if denom == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j], sn[j] = H[j, j] / denom, H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            history.append(abs(g[j + 1]))
            if abs(g[j + 1]) <= target or total >= maxiter or hn <= 1e-14 * max(denom, 1e-300):
                break
            V[j + 1] = w / hn
        y = _upper_solve(H[:k, :k], g[:k])
        x = x + apply_M(V[:k].T @ y)
        r = b - A @ x
        beta = float(np.linalg.norm(r))
    info = {"iterations": total, "residual": beta, "history": history}
    if beta > target:
        raise ConvergenceError(
            f"GMRES: residual {beta:.3e} > {target:.3e} after {total} iterations", x=x, history=history
        )
    return x, info


def _upper_solve(R, g):
    k = g.size
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        s = g[i] - R[i, i + 1 : k] @ y[i + 1 : k]
        y[i] = s / R[i, i] if R[i, i] != 0.0 else 0.0
    return y


def pcg(A, b, M=None, tol=1e-10, maxiter=None, x0=None, atol=1e-14, project_mean=False):
    """Preconditioned conjugate gradient for symmetric positive (semi-)definite ``A``.

    With ``project_mean=True`` the right-hand side, every preconditioned
    residual and the iterate are projected onto the mean-zero subspace, which
    makes the constant null space of pure-Neumann / periodic operators harmless.

    Returns ``(x, info)`` like :func:`gmres`.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    maxiter = 10 * n if maxiter is None else maxiter
    apply_M = _identity if M is None else (M.solve if hasattr(M, "solve") else M)

    def proj(v):
        return v - v.mean() if project_mean else v

    b = proj(b)
    x = np.zeros(n) if x0 is None else proj(np.array(x0, dtype=float))
    bnorm = float(np.linalg.norm(b))
    target = max(tol * bnorm, atol)
    r = b - A @ x
    rnorm = float(np.linalg.norm(r))
    history = [rnorm]
    if rnorm <= target:
        return x, {"iterations": 0, "residual": rnorm, "history": history}
    z = proj(apply_M(r))
    p = z.copy()
    rz = float(r @ z)
    it = 0
    while it < maxiter:
        it += 1
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            break
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        if it % 50 == 0:
            r = b - A @ x
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)
        if rnorm <= target:
            break
        z = proj(apply_M(r))
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    x = proj(x)
    rnorm = float(np.linalg.norm(b - A @ x))
    info = {"iterations": it, "residual": rnorm, "history": history}
    if rnorm > target:
        raise ConvergenceError(f"CG: residual {rnorm:.3e} > {target:.3e} after {it} iterations", x=x, history=history)
    return x, info
