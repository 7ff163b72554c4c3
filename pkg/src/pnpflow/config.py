"""INI problem files.

Example::

    [grid]
    nx = 32
    ny = 32
    lx = 1.0
    ly = 1.0

    [problem]
    eps = 0.01
    rho0 = 0

    [species.p]
    z = 1
    D = 1
    c0 = uniform:1

    [bc]
    mu = zeroflux
    phi = dirichlet:0

    [external]
    left = zeroflux 0 0.25; dirichlet 0.25 0.75 value=-1; zeroflux 0.75 1

    [solver]
    newton_tol = 1e-8

    [run]
    scheme = be
    dt = 4e-3
    t_end = 0.4

Boundary entries in ``[bc]`` take a shorthand for the whole boundary
(``periodic``, ``zeroflux``, ``dirichlet:<v>``, ``robin:<alpha>:<beta>``).
Per-edge keys such as ``phi.left`` or the edges of ``[external]`` take
``;``-separated segments ``kind [start end] [value=..] [alpha=..] [beta=..]``.
When ``[external]`` is present its Dirichlet data define ``phi_e`` and the
internal potential gets the homogeneous version of those conditions.
"""

from __future__ import annotations

import configparser
from dataclasses import fields
from pathlib import Path

from pnpflow.boundary import EDGES, BoundarySpec, Segment
from pnpflow.grid import Grid
from pnpflow.model import ProblemSpec, SpeciesSpec
from pnpflow.nonlinear import SolverConfig
from pnpflow.poisson import external_potential
from pnpflow.presets import RunParams, initial_condition


class ConfigError(ValueError):
    pass


def parse_segments(text: str) -> tuple:
    segs = []
    for part in text.split(";"):
        tokens = part.split()
        if not tokens:
            continue
        kind, rest = tokens[0].lower(), tokens[1:]
        pos = [t for t in rest if "=" not in t]
        kw = dict(t.split("=", 1) for t in rest if "=" in t)
        if len(pos) not in (0, 2):
            raise ConfigError(f"segment {part.strip()!r}: give both start and end or neither")
        unknown = set(kw) - {"value", "alpha", "beta"}
        if unknown:
            raise ConfigError(f"segment {part.strip()!r}: unknown keys {sorted(unknown)}")
        args = {k: float(v) for k, v in kw.items()}
        if pos:
            args["start"], args["end"] = float(pos[0]), float(pos[1])
        segs.append(Segment(kind, **args))
    if not segs:
        raise ConfigError(f"empty segment list {text!r}")
    return tuple(segs)


def parse_boundary(section, prefix: str) -> BoundarySpec:
    short = section.get(prefix, "zeroflux").strip().lower()
    name, *args = short.split(":")
    try:
        if name == "periodic":
            bc = BoundarySpec.periodic()
        elif name == "zeroflux":
            bc = BoundarySpec.zero_flux()
        elif name == "dirichlet":
            bc = BoundarySpec.dirichlet(float(args[0]) if args else 0.0)
        elif name == "robin":
            bc = BoundarySpec.robin(float(args[0]), float(args[1]))
        else:
            raise ConfigError(f"unknown boundary shorthand {short!r}")
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad boundary entry {prefix} = {short!r}: {exc}") from exc
    for edge in EDGES:
        key = f"{prefix}.{edge}"
        if key in section:
            bc = bc.with_edge(edge, parse_segments(section[key]))
    return bc


def load(path):
    """Parse a problem file into ``(ProblemSpec, SolverConfig, RunParams | None)``."""
    path = Path(path)
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with path.open() as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return _build(cp)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build(cp):
    if "grid" not in cp:
        raise ConfigError("missing [grid] section")
    g = cp["grid"]
    nx = g.getint("nx")
    grid = Grid(nx, g.getint("ny", nx), g.getfloat("lx", 1.0), g.getfloat("ly", 1.0))

    species = []
    for name in cp.sections():
        if name.startswith("species."):
            s = cp[name]
            c0 = initial_condition(grid, s.get("c0", "uniform:1"))
            species.append(SpeciesSpec(name.split(".", 1)[1], s.getfloat("z"), s.getfloat("D", 1.0), c0))
    if not species:
        raise ConfigError("no [species.<name>] sections")

    prob = cp["problem"] if "problem" in cp else {}
    eps = float(prob.get("eps", 1.0))
    rho0 = float(prob.get("rho0", 0.0))

    bc = cp["bc"] if "bc" in cp else {}
    bc_mu = parse_boundary(bc, "mu")
    bc_phi = parse_boundary(bc, "phi")
    phi_e = None
    if "external" in cp:
        ext = BoundarySpec.zero_flux()
        for edge in EDGES:
            if edge in cp["external"]:
                ext = ext.with_edge(edge, parse_segments(cp["external"][edge]))
        phi_e = external_potential(ext, eps, grid)
        bc_phi = ext.homogeneous()
    spec = ProblemSpec(grid, tuple(species), eps=eps, rho0=rho0, phi_e=phi_e, bc_mu=bc_mu, bc_phi=bc_phi)

    cfg = SolverConfig()
    if "solver" in cp:
        types = {f.name: f.type for f in fields(SolverConfig)}
        kw = {}
        for key, val in cp["solver"].items():
            if key not in types:
                raise ConfigError(f"unknown solver option {key!r}")
            kw[key] = int(val) if types[key] in (int, "int") else float(val)
        cfg = SolverConfig(**kw)

    params = None
    if "run" in cp:
        r = cp["run"]
        params = RunParams(r.get("scheme", "be").lower(), r.getfloat("dt"), r.getfloat("t_end"))
    return spec, cfg, params
