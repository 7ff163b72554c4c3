"""Temporal convergence study against a fine-step reference on the same grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pnpflow.grid import inner
from pnpflow.nonlinear import BDF2, SolverConfig
from pnpflow.presets import preset as make_preset
from pnpflow.stepper import n_steps_for, run

# tight enough that solver error stays well below the BDF2 time error at dt = 1e-3
STUDY_CONFIG = SolverConfig(newton_tol=1e-11, gmres_tol=1e-11, gmres_max_iters=2000)


@dataclass
class StudyRow:
    scheme: str
    dt: float
    error: float


@dataclass
class ConvergenceTable:
    preset: str
    t_end: float
    ref_dt: float
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    def errors(self, scheme: str):
        return [(r.dt, r.error) for r in self.rows if r.scheme == scheme]

    def to_csv(self) -> str:
        lines = [f"# preset={self.preset} t_end={self.t_end!r} ref_dt={self.ref_dt!r} reference=bdf2",
                 "scheme,dt,error,slope"]
        for r in self.rows:
            slope = self.slopes.get(r.scheme)
            lines.append(f"{r.scheme},{r.dt!r},{r.error:.17g},{'null' if slope is None else f'{slope:.6f}'}")
        return "\n".join(lines) + "\n"


def fit_slope(dts, errors) -> float | None:
    """Least-squares slope of log(error) against log(dt); ``None`` for fewer than two points."""
    if len(dts) < 2:
        return None
    return float(np.polyfit(np.log(dts), np.log(errors), 1)[0])


def _check_dts(dts, ref_dt, t_end):
    if not dts:
        raise ValueError("need at least one time step")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError(f"time steps must be strictly descending, got {list(dts)}")
    for dt in dts:
        ratio = dt / ref_dt
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError(f"dt={dt} is not an integer multiple of the reference step {ref_dt}")
        n_steps_for(dt, t_end)
    n_steps_for(ref_dt, t_end)


def state_error(a, b) -> float:
    """``sqrt(sum_i ||a_i - b_i||^2)`` in the cell-weighted discrete L2 norm."""
    total = 0.0
    for ca, cb in zip(a.c, b.c):
        d = ca.values - cb.values
        total += inner(type(ca)(ca.grid, d), type(ca)(ca.grid, d))
    return float(np.sqrt(total))


def convergence_study(name: str, schemes, dts, ref_dt: float, t_end: float = 0.1,
                      cfg: SolverConfig = STUDY_CONFIG, n: int | None = None) -> ConvergenceTable:
    dts = [float(d) for d in dts]
    _check_dts(dts, ref_dt, t_end)
    spec, _ = make_preset(name, n=n)
    reference = run(spec, BDF2, ref_dt, t_end, cfg).final
    table = ConvergenceTable(name, t_end, ref_dt)
    for scheme in schemes:
        errs = []
        for dt in dts:
            err = state_error(run(spec, scheme, dt, t_end, cfg).final, reference)
            table.rows.append(StudyRow(scheme, dt, err))
            errs.append(err)
        table.slopes[scheme] = fit_slope(dts, errs)
    return table
