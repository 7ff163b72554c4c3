import textwrap

import numpy as np
import pytest

from pnpflow import validate
from pnpflow.config import ConfigError, load, parse_segments
from pnpflow.presets import example3

EXAMPLE3_INI = """
[grid]
nx = 16

[problem]
eps = 0.01

[species.p]
z = 1
c0 = uniform:1

[species.n]
z = -1
c0 = uniform:1

[bc]
mu = zeroflux
phi = zeroflux

[external]
left = zeroflux 0 0.25; dirichlet 0.25 0.75 value=-1; zeroflux 0.75 1
right = zeroflux 0 0.25; dirichlet 0.25 0.75 value=-1; zeroflux 0.75 1
bottom = zeroflux 0 0.25; dirichlet 0.25 0.75 value=1; zeroflux 0.75 1
top = zeroflux 0 0.25; dirichlet 0.25 0.75 value=1; zeroflux 0.75 1

[solver]
newton_tol = 1e-8
newton_max_iters = 20

[run]
scheme = be
dt = 4e-3
t_end = 0.02
"""


def write(tmp_path, text, name="p.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


class TestSegments:
    def test_parse(self):
        segs = parse_segments("zeroflux 0 0.5; robin 0.5 1 alpha=2 beta=3")
        assert [s.kind for s in segs] == ["zeroflux", "robin"]
        assert (segs[1].start, segs[1].alpha, segs[1].beta) == (0.5, 2.0, 3.0)

    @pytest.mark.parametrize("text", ["", "dirichlet 0.5", "dirichlet 0 1 gain=2"])
    def test_bad(self, text):
        with pytest.raises(ConfigError):
            parse_segments(text)


class TestLoad:
    def test_electrode_problem(self, tmp_path):
        spec, cfg, params = load(write(tmp_path, EXAMPLE3_INI))
        assert validate(spec) == []
        assert spec.names == ["p", "n"] and spec.eps == 0.01
        assert cfg.newton_tol == 1e-8 and cfg.newton_max_iters == 20
        assert (params.scheme, params.dt, params.t_end) == ("be", 4e-3, 0.02)
        assert spec.bc_phi.is_singular is False
        assert -1.0 <= spec.phi_e.min() < 0 < spec.phi_e.max() <= 1.0

    def test_matches_preset_external_potential(self, tmp_path):
        text = EXAMPLE3_INI.replace("value=-1", "value=0").replace("value=1", "value=0")
        spec, _, _ = load(write(tmp_path, text))
        np.testing.assert_allclose(spec.phi_e.values, example3(a=0.0, n=16).phi_e.values, atol=1e-14)

    def test_shorthand_boundaries(self, tmp_path):
        spec, _, params = load(write(tmp_path, """
            [grid]
            nx = 4
            ny = 6
            lx = 2
            [species.c]
            z = 0
            [bc]
            mu = periodic
            phi = periodic
        """))
        assert spec.grid.shape == (4, 6) and spec.grid.lx == 2.0
        assert spec.bc_mu.is_periodic(0) and params is None
        assert validate(spec) == []

    @pytest.mark.parametrize("text,needle", [
        ("[species.c]\nz = 1\n", "grid"),
        ("[grid]\nnx = 4\n", "species"),
        ("[grid]\nnx = 4\n[species.c]\nz = 0\n[bc]\nphi = wall\n", "shorthand"),
        ("[grid]\nnx = 4\n[species.c]\nz = 0\n[solver]\nspeed = 3\n", "solver option"),
        ("[grid]\nnx = 4\n[species.c]\nz = 0\nc0 = pyramid\n", "unknown initial condition"),
    ])
    def test_errors(self, tmp_path, text, needle):
        with pytest.raises(ConfigError, match=needle):
            load(write(tmp_path, text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load(tmp_path / "nope.ini")
