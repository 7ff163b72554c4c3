import csv

import numpy as np
import pytest

from pnpflow import Field, Grid, State, run
from pnpflow.diagnostics import StepReport
from pnpflow.io import ReportWriter, SnapshotWriter, emit_reports, emit_snapshot, read_snapshot
from pnpflow.presets import example3


def random_state(rng, grid, n_species=2):
    return State(tuple(Field(grid, rng.uniform(1e-6, 3, grid.shape)) for _ in range(n_species)),
                 Field(grid, rng.normal(size=grid.shape)))


class TestSnapshot:
    def test_row_count(self, tmp_path, rng):
        g = Grid(2, 2)
        path = emit_snapshot(random_state(rng, g, 1), tmp_path / "s.csv", ["c"])
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["x", "y", "species_or_phi", "value"]
        assert len(rows) == 1 + 8
        assert [r[2] for r in rows[1:]] == ["c"] * 4 + ["phi"] * 4
        assert (float(rows[1][0]), float(rows[1][1])) == (0.25, 0.25)

    def test_round_trip_bit_exact(self, tmp_path, rng):
        g = Grid(7, 5, 2.0, 1.3)
        st = random_state(rng, g, 3)
        back = read_snapshot(emit_snapshot(st, tmp_path / "s.csv", ["a", "b", "c"]), g)
        for name, f in zip(["a", "b", "c"], st.c):
            np.testing.assert_array_equal(back[name].values, f.values)
        np.testing.assert_array_equal(back["phi"].values, st.phi.values)

    def test_reserved_name(self, tmp_path, rng):
        with pytest.raises(ValueError):
            emit_snapshot(random_state(rng, Grid(2, 2), 1), tmp_path / "s.csv", ["phi"])

    def test_unwritable_path(self, tmp_path, rng):
        with pytest.raises(OSError, match="missing"):
            emit_snapshot(random_state(rng, Grid(2, 2), 1), tmp_path / "missing" / "s.csv")


class TestReports:
    def test_rows_equal_steps(self, tmp_path):
        result = run(example3(n=8), "be", 4e-3, 2e-2)
        path = emit_reports(result.reports, tmp_path / "r.csv")
        rows = list(csv.reader(path.open()))
        assert rows[0] == StepReport.header(2)
        assert len(rows) - 1 == result.n_steps == 5
        assert float(rows[-1][rows[0].index("energy")]) == result.reports[-1].energy

    def test_streaming_writer(self, tmp_path):
        spec = example3(n=8)
        snaps = SnapshotWriter(tmp_path, spec.names, every=2)
        with ReportWriter(tmp_path / "r.csv", 2) as writer:
            run(spec, "be", 4e-3, 2e-2, sinks=[writer, snaps])
        assert writer.rows == 5
        assert [p.name for p in snaps.written] == ["snapshot_000002.csv", "snapshot_000004.csv"]

    def test_empty_needs_species_count(self, tmp_path):
        with pytest.raises(ValueError):
            emit_reports([], tmp_path / "r.csv")
        emit_reports([], tmp_path / "r.csv", n_species=3)
        assert (tmp_path / "r.csv").read_text().startswith("step,t,mass_1,mass_2,mass_3")
