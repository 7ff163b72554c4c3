"""Time integration: backward Euler and BDF2 with positivity-preserving extrapolation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from pnpflow.diagnostics import StepReport, discrete_energy, make_report, monitor
from pnpflow.errors import PNPError, PositivityError
from pnpflow.grid import Field
from pnpflow.model import ProblemSpec, State, initial_state, validate
from pnpflow.nonlinear import BDF2, BE, NonlinearSystem, SolverConfig, newton_solve

logger = logging.getLogger(__name__)


class StepFailedError(PNPError, RuntimeError):
    """A time step failed; ``step`` is its 1-based index."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step} failed: {cause}")
        self.step = step
        self.cause = cause


def extrapolate(cn: Field, cnm1: Field) -> Field:
    """Positivity-preserving second-order extrapolation of ``c^{n+1}``.

    ``2 c^n - c^{n-1}`` where the concentration grows and the harmonic
    counterpart ``1 / (2/c^n - 1/c^{n-1})`` where it decays.
    """
    a, b = cn.values, cnm1.values
    if np.any(a <= 0) or np.any(b <= 0):
        raise PositivityError("extrapolation needs positive inputs")
    grow = a >= b
    out = np.where(grow, 2.0 * a - b, 1.0 / np.where(grow, 1.0, 2.0 / a - 1.0 / b))
    return Field(cn.grid, out)


def _finish(spec, sys, state_prev, new, stats, dt, index):
    new = replace(new, t=state_prev.t + dt)
    report = make_report(index, new, spec, stats=stats, prev_energy=discrete_energy(state_prev, spec),
                         mobility=sys.mobility, dt=dt)
    return new, report


def step_be(state: State, dt: float, spec: ProblemSpec, cfg: SolverConfig = SolverConfig(), index: int = 1):
    """One backward-Euler step with frozen mobility ``c^n``.

    Returns ``(new_state, StepReport)``.
    """
    c_prev = [c.values for c in state.c]
    sys = NonlinearSystem(spec, dt, c_prev, c_prev, kind=BE)
    new, stats = newton_solve(sys, state, cfg)
    return _finish(spec, sys, state, new, stats, dt, index)


def step_bdf2(state_n: State, state_nm1: State, dt: float, spec: ProblemSpec,
              cfg: SolverConfig = SolverConfig(), index: int = 2):
    """One BDF2 step with mobility from :func:`extrapolate`."""
    mob = [extrapolate(a, b).values for a, b in zip(state_n.c, state_nm1.c)]
    sys = NonlinearSystem(spec, dt, [c.values for c in state_n.c], mob, kind=BDF2,
                          c_prev2=[c.values for c in state_nm1.c])
    new, stats = newton_solve(sys, state_n, cfg)
    return _finish(spec, sys, state_n, new, stats, dt, index)


@dataclass
class RunResult:
    final: State
    initial_report: StepReport
    reports: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    states: list | None = None

    @property
    def n_steps(self) -> int:
        return len(self.reports)


def n_steps_for(dt: float, t_end: float) -> int:
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not a positive integer multiple of dt={dt}")
    return n


def run(spec: ProblemSpec, scheme: str, dt: float, t_end: float, cfg: SolverConfig = SolverConfig(),
        sinks: Sequence[Callable[[State, StepReport], None]] = (), initial: State | None = None,
        keep_states: bool = False) -> RunResult:
    """Integrate from ``t = 0`` to ``t_end`` with constant ``dt``.

    BDF2 takes its first step with backward Euler. Each sink is called as
    ``sink(state, report)`` after every step, in step order.
    """
    problems = validate(spec)
    if problems:
        raise ValueError("invalid problem: " + "; ".join(problems))
    scheme = scheme.lower()
    if scheme not in (BE, BDF2):
        raise ValueError(f"unknown scheme {scheme!r}; expected 'be' or 'bdf2'")
    n = n_steps_for(dt, t_end)
    state = initial if initial is not None else initial_state(spec)
    result = RunResult(final=state, initial_report=make_report(0, state, spec))
    if keep_states:
        result.states = [state]
    prev = None
    for k in range(1, n + 1):
        try:
            if scheme == BE or prev is None:
                new, report = step_be(state, dt, spec, cfg, index=k)
            else:
                new, report = step_bdf2(state, prev, dt, spec, cfg, index=k)
        except PNPError as exc:
            raise StepFailedError(k, exc) from exc
        new = replace(new, t=k * dt)
        report = replace(report, t=k * dt)
        prev, state = state, new
        result.reports.append(report)
        if keep_states:
            result.states.append(state)
        for sink in sinks:
            sink(state, report)
        logger.debug("step %d t=%.4g newton=%d gmres_max=%d E=%.10g", k, report.t, report.newton_iters,
                     report.gmres_max, report.energy)
    result.final = state
    result.warnings = monitor(spec, result.initial_report, result.reports)
    return result
