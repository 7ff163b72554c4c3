"""Piecewise boundary specifications on the four edges of a rectangle.

Each edge carries an ordered list of :class:`Segment` objects. A segment
covers an interval of the edge's tangential coordinate (``y`` on the
left/right edges, ``x`` on the bottom/top edges). The ghost-cell rule for a
boundary face is chosen by the segment containing the face midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from pnpflow.grid import Grid

PERIODIC = "periodic"
ZEROFLUX = "zeroflux"
DIRICHLET = "dirichlet"
ROBIN = "robin"
KINDS = (PERIODIC, ZEROFLUX, DIRICHLET, ROBIN)
KIND_CODE = {PERIODIC: 0, ZEROFLUX: 1, DIRICHLET: 2, ROBIN: 3}

EDGES = ("left", "right", "bottom", "top")
_OPPOSITE = {"left": "right", "right": "left", "bottom": "top", "top": "bottom"}

Value = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Segment:
    """One boundary condition on ``start <= s < end`` of an edge.

    ``value`` is the Dirichlet datum (constant or a function of the
    tangential coordinate). ``alpha`` and ``beta`` are the Robin weights in
    ``alpha*u + beta*du/dn = 0``.
    """

    kind: str
    start: float = -np.inf
    end: float = np.inf
    value: Value = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}; expected one of {KINDS}")

    def evaluate(self, s: np.ndarray) -> np.ndarray:
        if callable(self.value):
            return np.broadcast_to(np.asarray(self.value(s), dtype=float), s.shape).copy()
        return np.full(s.shape, float(self.value))


def _full(kind, **kw):
    return (Segment(kind, **kw),)


@dataclass(frozen=True)
class EdgeFaces:
    """Per-face boundary data along one edge (arrays of the edge length)."""

    kind: np.ndarray
    value: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class BoundarySpec:
    left: tuple = field(default_factory=lambda: _full(ZEROFLUX))
    right: tuple = field(default_factory=lambda: _full(ZEROFLUX))
    bottom: tuple = field(default_factory=lambda: _full(ZEROFLUX))
    top: tuple = field(default_factory=lambda: _full(ZEROFLUX))

    def __post_init__(self):
        for edge in EDGES:
            segs = getattr(self, edge)
            if isinstance(segs, Segment):
                segs = (segs,)
            object.__setattr__(self, edge, tuple(segs))

    # -- constructors -------------------------------------------------
    @classmethod
    def periodic(cls) -> "BoundarySpec":
        return cls(*(_full(PERIODIC) for _ in EDGES))

    @classmethod
    def zero_flux(cls) -> "BoundarySpec":
        return cls(*(_full(ZEROFLUX) for _ in EDGES))

    @classmethod
    def dirichlet(cls, value: Value = 0.0) -> "BoundarySpec":
        return cls(*(_full(DIRICHLET, value=value) for _ in EDGES))

    @classmethod
    def robin(cls, alpha: float, beta: float) -> "BoundarySpec":
        return cls(*(_full(ROBIN, alpha=alpha, beta=beta) for _ in EDGES))

    def segments(self, edge: str) -> tuple:
        return getattr(self, edge)

    def with_edge(self, edge: str, segments) -> "BoundarySpec":
        if isinstance(segments, Segment):
            segments = (segments,)
        return replace(self, **{edge: tuple(segments)})

    def homogeneous(self) -> "BoundarySpec":
        """Same segment layout with every Dirichlet datum set to zero."""
        out = {}
        for edge in EDGES:
            out[edge] = tuple(replace(s, value=0.0) if s.kind == DIRICHLET else s for s in self.segments(edge))
        return BoundarySpec(**out)

    # -- queries ------------------------------------------------------
    def kinds(self) -> set:
        return {s.kind for edge in EDGES for s in self.segments(edge)}

    def is_periodic(self, axis: int) -> bool:
        """True when the edge pair normal to ``axis`` (0: x, 1: y) is periodic."""
        a, b = ("left", "right") if axis == 0 else ("bottom", "top")
        return all(len(self.segments(e)) == 1 and self.segments(e)[0].kind == PERIODIC for e in (a, b))

    @property
    def is_singular(self) -> bool:
        """No Dirichlet or Robin face: the potential is fixed only up to a constant."""
        return not (self.kinds() & {DIRICHLET, ROBIN})

    def edge_faces(self, grid: Grid, edge: str) -> EdgeFaces:
        """Expand the segment list of ``edge`` to per-face arrays."""
        s = grid.y if edge in ("left", "right") else grid.x
        length = grid.ly if edge in ("left", "right") else grid.lx
        n = s.size
        kind = np.full(n, KIND_CODE[ZEROFLUX], dtype=np.int8)
        value = np.zeros(n)
        alpha = np.zeros(n)
        beta = np.zeros(n)
        assigned = np.zeros(n, dtype=bool)
        segs = self.segments(edge)
        for i, seg in enumerate(segs):
            lo = seg.start
            hi = seg.end if i < len(segs) - 1 else max(seg.end, length) + 1.0
            mask = (s >= lo) & (s < hi) & ~assigned
            if not mask.any():
                continue
            assigned |= mask
            kind[mask] = KIND_CODE[seg.kind]
            if seg.kind == DIRICHLET:
                value[mask] = seg.evaluate(s)[mask]
            elif seg.kind == ROBIN:
                alpha[mask] = seg.alpha
                beta[mask] = seg.beta
        return EdgeFaces(kind, value, alpha, beta)

    def validate(self, grid: Grid | None = None, lx: float = None, ly: float = None) -> list:
        """Return a list of human-readable problems (empty when consistent)."""
        problems = []
        if grid is not None:
            lx, ly = grid.lx, grid.ly
        for edge in EDGES:
            segs = self.segments(edge)
            length = ly if edge in ("left", "right") else lx
            if not segs:
                problems.append(f"{edge}: no boundary segments")
                continue
            for seg in segs:
                if seg.kind == ROBIN and not (seg.alpha > 0 and seg.beta > 0):
                    problems.append(f"{edge}: Robin segment needs alpha, beta > 0 (got {seg.alpha}, {seg.beta})")
                if seg.start >= seg.end:
                    problems.append(f"{edge}: empty segment [{seg.start}, {seg.end})")
            ordered = sorted(segs, key=lambda z: z.start)
            if list(ordered) != list(segs):
                problems.append(f"{edge}: segments are not in increasing order")
            if length is not None:
                tol = 1e-12 * max(1.0, length)
                if ordered[0].start > tol:
                    problems.append(f"{edge}: segments leave [0, {ordered[0].start}) uncovered")
                if ordered[-1].end < length - tol:
                    problems.append(f"{edge}: segments leave [{ordered[-1].end}, {length}] uncovered")
            for a, b in zip(ordered, ordered[1:]):
                if b.start < a.end - 1e-12:
                    problems.append(f"{edge}: segments [{a.start}, {a.end}) and [{b.start}, {b.end}) overlap")
                elif b.start > a.end + 1e-12:
                    problems.append(f"{edge}: gap between {a.end} and {b.start}")
            has_periodic = any(seg.kind == PERIODIC for seg in segs)
            if has_periodic:
                other = self.segments(_OPPOSITE[edge])
                if len(segs) != 1 or len(other) != 1 or other[0].kind != PERIODIC:
                    problems.append(f"{edge}: periodic must cover the full edge and its opposite edge")
        return problems
