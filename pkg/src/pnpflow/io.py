"""CSV output: field snapshots and per-step report tables."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from pnpflow.diagnostics import StepReport
from pnpflow.grid import Field, Grid
from pnpflow.model import State

SNAPSHOT_HEADER = ("x", "y", "species_or_phi", "value")
PHI = "phi"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def emit_snapshot(state: State, path, names: Sequence[str] | None = None) -> Path:
    """Write every species and the potential, one row per cell and field.

    Values carry 17 significant digits, so reading the file back reproduces
    the arrays bit for bit.
    """
    path = Path(path)
    g = state.grid
    names = list(names) if names is not None else [f"c{i + 1}" for i in range(len(state.c))]
    if len(names) != len(state.c):
        raise ValueError(f"{len(names)} names for {len(state.c)} species")
    if PHI in names:
        raise ValueError(f"species name {PHI!r} is reserved for the potential")
    X, Y = g.meshgrid()
    xs, ys = X.ravel(), Y.ravel()
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SNAPSHOT_HEADER)
            for name, f in list(zip(names, state.c)) + [(PHI, state.phi)]:
                for x, y, v in zip(xs, ys, f.flat):
                    w.writerow((f"{x:.17g}", f"{y:.17g}", name, f"{v:.17g}"))
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc
    return path


def read_snapshot(path, grid: Grid) -> dict:
    """Read a snapshot back into ``{name: Field}`` (``"phi"`` for the potential)."""
    path = Path(path)
    cols: dict[str, list] = {}
    try:
        with path.open(newline="") as fh:
            r = csv.reader(fh)
            header = tuple(next(r))
            if header != SNAPSHOT_HEADER:
                raise ValueError(f"{path}: unexpected header {header}")
            for row in r:
                cols.setdefault(row[2], []).append(float(row[3]))
    except OSError as exc:
        raise OSError(f"cannot read snapshot {path}: {exc}") from exc
    return {name: Field(grid, np.array(vals)) for name, vals in cols.items()}


def emit_reports(reports: Sequence[StepReport], path, n_species: int | None = None) -> Path:
    """Write step reports as CSV with the fixed diagnostics header."""
    path = Path(path)
    if n_species is None:
        if not reports:
            raise ValueError("n_species is required for an empty report list")
        n_species = len(reports[0].masses)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(StepReport.header(n_species))
            for rep in reports:
                w.writerow([_fmt(v) for v in rep.row()])
    except OSError as exc:
        raise OSError(f"cannot write reports {path}: {exc}") from exc
    return path


class ReportWriter:
    """Run sink that appends one CSV row per step, flushing as it goes."""

    def __init__(self, path, n_species: int):
        self.path = Path(path)
        self._fh = self.path.open("w", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(StepReport.header(n_species))
        self.rows = 0

    def write(self, report: StepReport):
        self._w.writerow([_fmt(v) for v in report.row()])
        self._fh.flush()
        self.rows += 1

    def __call__(self, state: State, report: StepReport):
        self.write(report)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SnapshotWriter:
    """Run sink writing ``snapshot_<step>.csv`` every ``every`` steps."""

    def __init__(self, directory, names=None, every: int = 1):
        if every < 1:
            raise ValueError("every must be >= 1")
        self.directory = Path(directory)
        self.names = names
        self.every = every
        self.written: list[Path] = []

    def path_for(self, step: int) -> Path:
        return self.directory / f"snapshot_{step:06d}.csv"

    def __call__(self, state: State, report: StepReport):
        if report.step % self.every == 0:
            self.written.append(emit_snapshot(state, self.path_for(report.step), self.names))
