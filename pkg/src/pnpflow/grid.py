"""Uniform cell-centred rectangular grids and grid functions.

Node ``(j, k)`` (zero-based here) sits at ``((j + 1/2) hx, (k + 1/2) hy)``.
Values are stored as ``(nx, ny)`` arrays indexed ``[j, k]`` and flattened in
C order, so the flat index of node ``(j, k)`` is ``j * ny + k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from pnpflow.errors import DimensionError


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on ``[0, lx] x [0, ly]``."""

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise ValueError(f"cell counts must be positive integers, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0 and np.isfinite(self.lx) and np.isfinite(self.ly)):
            raise ValueError(f"domain lengths must be positive, got {self.lx}, {self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.hx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.hy

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two ``(nx, ny)`` arrays."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def index(self, j: int, k: int) -> int:
        return j * self.ny + k


class Field:
    """Grid function: one real value per cell centre.

    Fields are treated as immutable; operations return fresh instances.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        arr = np.array(values, dtype=float)
        if arr.ndim == 0:
            arr = np.full(grid.shape, float(arr))
        elif arr.shape != grid.shape:
            if arr.size == grid.size:
                arr = arr.reshape(grid.shape)
            else:
                raise DimensionError(f"values of shape {arr.shape} do not fit grid {grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr.setflags(write=False)
        self.grid = grid
        self.values = arr

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "Field":
        X, Y = grid.meshgrid()
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def __repr__(self):
        return f"Field({self.grid.nx}x{self.grid.ny}, min={self.min():.4g}, max={self.max():.4g})"


def _check_same_grid(u: Field, v: Field):
    if u.grid != v.grid:
        raise DimensionError(f"grid mismatch: {u.grid} vs {v.grid}")


def inner(u: Field, v: Field) -> float:
    """Discrete L2 inner product ``hx*hy*sum(u*v)``."""
    _check_same_grid(u, v)
    return float(u.grid.cell_area * np.sum(u.values * v.values))


def norm(u: Field) -> float:
    return float(np.sqrt(inner(u, u)))
