"""Finite-difference operators with summation-by-parts boundary handling.

Both operators are assembled face by face. Interior faces (and wrap-around
faces on periodic axes) couple two nodes; boundary faces only touch the
adjacent node through its ghost value:

* zero flux: ghost equals the interior value, the face term vanishes;
* Dirichlet ``g``: ghost ``2g - u`` so the face midpoint value is ``g``;
* Robin ``alpha*u + beta*du/dn = 0``: ghost ``r*u`` with
  ``r = (beta/h - alpha/2) / (beta/h + alpha/2)``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from pnpflow.boundary import DIRICHLET, EDGES, KIND_CODE, PERIODIC, ROBIN, BoundarySpec
from pnpflow.errors import UnsupportedBoundaryError
from pnpflow.grid import Field, Grid, _check_same_grid


@lru_cache(maxsize=64)
def interior_faces(grid: Grid, periodic_x: bool, periodic_y: bool):
    """Node pairs ``(a, b)`` across every two-sided face, with ``1/h^2`` weights.

    Returns flat index arrays ``a``, ``b`` and the per-face ``1/h^2`` of the
    face normal direction.
    """
    nx, ny = grid.shape
    idx = np.arange(grid.size).reshape(grid.shape)
    a_list, b_list, w_list = [], [], []
    if nx > 1 or periodic_x:
        a = idx[:-1, :].ravel() if nx > 1 else np.empty(0, dtype=int)
        b = idx[1:, :].ravel() if nx > 1 else np.empty(0, dtype=int)
        if periodic_x and nx > 1:
            a = np.concatenate([a, idx[-1, :]])
            b = np.concatenate([b, idx[0, :]])
        a_list.append(a)
        b_list.append(b)
        w_list.append(np.full(a.size, 1.0 / grid.hx**2))
    if ny > 1 or periodic_y:
        a = idx[:, :-1].ravel() if ny > 1 else np.empty(0, dtype=int)
        b = idx[:, 1:].ravel() if ny > 1 else np.empty(0, dtype=int)
        if periodic_y and ny > 1:
            a = np.concatenate([a, idx[:, -1]])
            b = np.concatenate([b, idx[:, 0]])
        a_list.append(a)
        b_list.append(b)
        w_list.append(np.full(a.size, 1.0 / grid.hy**2))
    a = np.concatenate(a_list) if a_list else np.empty(0, dtype=int)
    b = np.concatenate(b_list) if b_list else np.empty(0, dtype=int)
    w = np.concatenate(w_list) if w_list else np.empty(0)
    for arr in (a, b, w):
        arr.setflags(write=False)
    return a, b, w


def boundary_faces(grid: Grid, bc: BoundarySpec):
    """Per-face data for all one-sided boundary faces.

    Returns a dict of equal-length arrays: ``node`` (flat index), ``kind``
    (code), ``value``, ``alpha``, ``beta`` and ``h`` (normal spacing).
    """
    idx = np.arange(grid.size).reshape(grid.shape)
    parts = []
    for edge in EDGES:
        axis = 0 if edge in ("left", "right") else 1
        if bc.is_periodic(axis):
            continue
        faces = bc.edge_faces(grid, edge)
        if np.any(faces.kind == KIND_CODE[PERIODIC]):
            raise UnsupportedBoundaryError(f"{edge}: periodic segment without a periodic opposite edge")
        node = {"left": idx[0, :], "right": idx[-1, :], "bottom": idx[:, 0], "top": idx[:, -1]}[edge]
        h = grid.hx if axis == 0 else grid.hy
        parts.append((node, faces, h))
    if not parts:
        empty = np.empty(0)
        return dict(node=np.empty(0, dtype=int), kind=np.empty(0, dtype=np.int8), value=empty,
                    alpha=empty, beta=empty, h=empty)
    return dict(
        node=np.concatenate([p[0] for p in parts]),
        kind=np.concatenate([p[1].kind for p in parts]),
        value=np.concatenate([p[1].value for p in parts]),
        alpha=np.concatenate([p[1].alpha for p in parts]),
        beta=np.concatenate([p[1].beta for p in parts]),
        h=np.concatenate([np.full(p[0].size, p[2]) for p in parts]),
    )


def _flux_faces(grid: Grid, bc: BoundarySpec):
    """Two-sided faces for a chemical-potential operator (flux or periodic BCs only)."""
    bad = bc.kinds() & {DIRICHLET, ROBIN}
    if bad:
        raise UnsupportedBoundaryError(f"chemical potentials accept only periodic/zero-flux conditions, got {sorted(bad)}")
    for axis, (e0, e1) in enumerate((("left", "right"), ("bottom", "top"))):
        if PERIODIC in {s.kind for s in bc.segments(e0) + bc.segments(e1)} and not bc.is_periodic(axis):
            raise UnsupportedBoundaryError(f"{e0}/{e1}: periodic segment without a periodic opposite edge")
    return interior_faces(grid, bc.is_periodic(0), bc.is_periodic(1))


def _face_mobility(mobility: np.ndarray, a, b, w, D: float):
    m = mobility.ravel()
    return D * 0.5 * (m[a] + m[b]) * w


def div_c_grad_matrix(grid: Grid, mobility: np.ndarray, bc: BoundarySpec, D: float = 1.0) -> sp.csr_matrix:
    """Sparse matrix of ``u -> D div(m grad u)`` with arithmetic-mean face mobilities."""
    a, b, w = _flux_faces(grid, bc)
    wf = _face_mobility(np.asarray(mobility, dtype=float), a, b, w, D)
    n = grid.size
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([b, a, a, b])
    vals = np.concatenate([wf, wf, -wf, -wf])
    G = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    G.sum_duplicates()
    G.sort_indices()
    return G


def laplacian_system(grid: Grid, eps: float, bc: BoundarySpec):
    """Affine form of ``phi -> -div(eps grad phi)``.

    Returns ``(L, g)`` with ``neg_div_eps_grad(phi) = L @ phi + g``; ``g``
    carries the Dirichlet data and vanishes for homogeneous conditions.
    """
    a, b, w = interior_faces(grid, bc.is_periodic(0), bc.is_periodic(1))
    bf = boundary_faces(grid, bc)
    n = grid.size
    we = eps * w
    diag = np.zeros(n)
    np.add.at(diag, a, we)
    np.add.at(diag, b, we)
    shift = np.zeros(n)
    wb = eps / bf["h"] ** 2
    dir_mask = bf["kind"] == KIND_CODE[DIRICHLET]
    np.add.at(diag, bf["node"][dir_mask], 2.0 * wb[dir_mask])
    np.add.at(shift, bf["node"][dir_mask], -2.0 * wb[dir_mask] * bf["value"][dir_mask])
    rob = bf["kind"] == KIND_CODE[ROBIN]
    if rob.any():
        np.add.at(diag, bf["node"][rob], wb[rob] * (1.0 - robin_ratio(bf["alpha"][rob], bf["beta"][rob], bf["h"][rob])))
    rows = np.concatenate([a, b, np.arange(n)])
    cols = np.concatenate([b, a, np.arange(n)])
    vals = np.concatenate([-we, -we, diag])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    L.sum_duplicates()
    L.sort_indices()
    return L, shift


def robin_ratio(alpha, beta, h):
    """Ghost/interior ratio for ``alpha*u + beta*du/dn = 0`` at a face."""
    return (beta / h - 0.5 * alpha) / (beta / h + 0.5 * alpha)


def div_c_grad(cface_source: Field, mu: Field, bc: BoundarySpec, D: float = 1.0) -> Field:
    """Discrete ``D div(c grad mu)`` with face coefficients ``(c_a + c_b)/2``.

    Parameters
    ----------
    cface_source : Field
        Mobility field (``c^n`` or the extrapolated ``c_bar``); must be positive.
    mu : Field
        Potential being differentiated.
    bc : BoundarySpec
        Periodic and/or zero-flux conditions. Dirichlet or Robin raise
        :class:`UnsupportedBoundaryError`.
    D : float
        Diffusivity.
    """
    _check_same_grid(cface_source, mu)
    G = div_c_grad_matrix(mu.grid, cface_source.values, bc, D)
    return Field(mu.grid, G @ mu.flat)


def neg_div_eps_grad(phi: Field, eps: float, bc: BoundarySpec) -> Field:
    """Discrete ``-div(eps grad phi)`` (5-point stencil with ghost cells)."""
    L, g = laplacian_system(phi.grid, eps, bc)
    return Field(phi.grid, L @ phi.flat + g)


def mobility_form(grid: Grid, mobility: np.ndarray, u: np.ndarray, bc: BoundarySpec, D: float = 1.0) -> float:
    """Face sum ``hx*hy * sum_faces D m_face (du/h)^2``; equals ``-inner(div_c_grad(m, u), u)``."""
    a, b, w = _flux_faces(grid, bc)
    wf = _face_mobility(np.asarray(mobility, dtype=float), a, b, w, D)
    uf = np.asarray(u, dtype=float).ravel()
    return float(grid.cell_area * np.sum(wf * (uf[a] - uf[b]) ** 2))


def potential_form(grid: Grid, eps: float, u: np.ndarray, bc: BoundarySpec) -> float:
    """Face sum of ``eps |grad u|^2`` including one-sided boundary faces.

    Boundary faces use the homogeneous ghost rule, so the result equals
    ``inner(L u, u)`` for the linear part ``L`` of :func:`laplacian_system`.
    """
    a, b, w = interior_faces(grid, bc.is_periodic(0), bc.is_periodic(1))
    uf = np.asarray(u, dtype=float).ravel()
    total = np.sum(eps * w * (uf[a] - uf[b]) ** 2)
    bf = boundary_faces(grid, bc)
    if bf["node"].size:
        ui = uf[bf["node"]]
        wb = eps / bf["h"] ** 2
        dir_mask = bf["kind"] == KIND_CODE[DIRICHLET]
        total += np.sum(2.0 * wb[dir_mask] * ui[dir_mask] ** 2)
        rob = bf["kind"] == KIND_CODE[ROBIN]
        if rob.any():
            r = robin_ratio(bf["alpha"][rob], bf["beta"][rob], bf["h"][rob])
            total += np.sum(wb[rob] * (1.0 - r) * ui[rob] ** 2)
    return float(grid.cell_area * total)


__all__ = [
    "boundary_faces",
    "div_c_grad",
    "div_c_grad_matrix",
    "interior_faces",
    "laplacian_system",
    "mobility_form",
    "neg_div_eps_grad",
    "potential_form",
    "robin_ratio",
]
