"""Command-line entry point: ``pnpflow run | converge | validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from pnpflow.config import ConfigError, load
from pnpflow.errors import PNPError
from pnpflow.diagnostics import make_report
from pnpflow.io import ReportWriter, SnapshotWriter, emit_snapshot
from pnpflow.model import initial_state, validate
from pnpflow.nonlinear import SolverConfig
from pnpflow.presets import PRESETS, RunParams, preset
from pnpflow.stepper import run
from pnpflow.study import STUDY_CONFIG, convergence_study

logger = logging.getLogger("pnpflow")


def _float_list(text: str):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnpflow", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a preset or a problem file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", type=Path, help="INI problem file")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--scheme", choices=("be", "bdf2"))
    p.add_argument("--grid", type=int, help="cells per direction (presets only)")
    p.add_argument("--a", type=float, help="ramp slope for example3")
    p.add_argument("--A", type=float, help="electrode amplitude for example4")
    p.add_argument("--out-dir", type=Path, default=Path("pnp_out"))
    p.add_argument("--snapshot-every", type=int, default=0,
                   help="write a snapshot every k steps (0: initial and final only)")

    c = sub.add_parser("converge", help="temporal convergence study against a fine BDF2 reference")
    c.add_argument("--preset", choices=PRESETS, required=True)
    c.add_argument("--scheme", choices=("be", "bdf2"), action="append", required=True,
                   help="repeat to study several schemes")
    c.add_argument("--dts", type=_float_list, required=True, help="descending list, e.g. 4e-3,2e-3,1e-3")
    c.add_argument("--ref-dt", type=float, required=True)
    c.add_argument("--t-end", type=float, default=0.1)
    c.add_argument("--grid", type=int)
    c.add_argument("--out", type=Path, help="also write the table here")

    v = sub.add_parser("validate", help="check a problem file without running it")
    v.add_argument("--config", type=Path, required=True)
    return parser


def _cmd_run(args) -> int:
    if args.config is not None:
        if args.grid is not None or args.a is not None or args.A is not None:
            raise ConfigError("--grid, --a and --A apply to presets only")
        spec, cfg, params = load(args.config)
        params = params or RunParams("be", None, None)
        params = RunParams(args.scheme or params.scheme,
                           args.dt if args.dt is not None else params.dt,
                           args.t_end if args.t_end is not None else params.t_end)
        if params.dt is None or params.t_end is None:
            raise ConfigError("dt and t_end must come from [run] or the command line")
        names = spec.names
    else:
        spec, params = preset(args.preset, a=args.a, A=args.A, n=args.grid, dt=args.dt,
                              t_end=args.t_end, scheme=args.scheme)
        cfg = SolverConfig()
        names = spec.names
    problems = validate(spec)
    if problems:
        for msg in problems:
            print(f"invalid: {msg}", file=sys.stderr)
        return 1

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    state0 = initial_state(spec)
    emit_snapshot(state0, out / "snapshot_000000.csv", names)
    sinks = []
    if args.snapshot_every > 0:
        sinks.append(SnapshotWriter(out, names, args.snapshot_every))
    with ReportWriter(out / "reports.csv", spec.n_species) as writer:
        writer.write(make_report(0, state0, spec))
        sinks.append(writer)
        result = run(spec, params.scheme, params.dt, params.t_end, cfg, sinks=sinks, initial=state0)
    final_path = out / f"snapshot_{result.n_steps:06d}.csv"
    if not final_path.exists():
        emit_snapshot(result.final, final_path, names)

    last = result.reports[-1]
    print(f"{result.n_steps} steps of {params.scheme} with dt={params.dt:g} to t={last.t:g}")
    print(f"energy {result.initial_report.energy:.10g} -> {last.energy:.10g}")
    print(f"min concentration {min(min(r.mins) for r in result.reports):.6e}")
    for w in result.warnings:
        print(f"warning: {w}")
    print(f"output written to {out}")
    return 0


def _cmd_converge(args) -> int:
    table = convergence_study(args.preset, args.scheme, args.dts, args.ref_dt, args.t_end,
                              cfg=STUDY_CONFIG, n=args.grid)
    text = table.to_csv()
    sys.stdout.write(text)
    if args.out is not None:
        args.out.write_text(text)
    return 0


def _cmd_validate(args) -> int:
    spec, _, params = load(args.config)
    problems = validate(spec)
    if params is not None and (params.dt is None or params.t_end is None):
        problems.append("[run] needs both dt and t_end")
    if problems:
        for msg in problems:
            print(f"invalid: {msg}", file=sys.stderr)
        return 1
    print(f"ok: {spec.n_species} species on a {spec.grid.nx}x{spec.grid.ny} grid")
    return 0


COMMANDS = {"run": _cmd_run, "converge": _cmd_converge, "validate": _cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (PNPError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
