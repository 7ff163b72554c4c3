import numpy as np
import pytest

from pnpflow import validate
from pnpflow.presets import PRESETS, initial_condition, preset
from pnpflow.grid import Grid


class TestPresets:
    @pytest.mark.parametrize("name", PRESETS)
    def test_valid(self, name):
        spec, params = preset(name, n=8)
        assert validate(spec) == []
        assert params.dt > 0 and params.t_end > 0

    def test_example1(self):
        spec, params = preset("example1")
        assert spec.grid.shape == (64, 64) and spec.grid.lx == pytest.approx(2 * np.pi)
        assert list(spec.z) == [1.0, -1.0] and list(spec.D) == [1.0, 1.0]
        X, Y = spec.grid.meshgrid()
        np.testing.assert_allclose(spec.species[0].c0.values, 1.1 + np.sin(X) * np.cos(Y))
        np.testing.assert_allclose(spec.species[1].c0.values, 1.1 - np.sin(X) * np.cos(Y))

    def test_example3(self):
        spec, params = preset("example3", a=2.5)
        assert spec.eps == 0.01 and spec.rho0 == 0.0 and list(spec.D) == [1.0, 1.0]
        assert spec.grid.shape == (32, 32)
        assert (params.scheme, params.dt, params.t_end) == ("be", 4e-3, 0.4)
        assert spec.phi_e.max() > 0

    def test_example4(self):
        spec, _ = preset("example4", A=1.0)
        assert list(spec.z) == [1.0, -1.0, 2.0]
        assert [s.c0.values[0, 0] for s in spec.species] == [1.0, 3.0, 1.0]

    @pytest.mark.parametrize("a", [0.0, 1.0, 2.5, 5.0])
    def test_example3_range(self, a):
        assert validate(preset("example3", a=a, n=8)[0]) == []

    @pytest.mark.parametrize("A", [0.0, 0.5, 2.0])
    def test_example4_range(self, A):
        assert validate(preset("example4", A=A, n=8)[0]) == []

    def test_zero_drive_has_zero_external_potential(self):
        spec, _ = preset("example3", a=0.0, n=8)
        np.testing.assert_allclose(spec.phi_e.values, 0.0, atol=1e-14)

    @pytest.mark.parametrize("kw", [dict(name="example5"), dict(name="example1", a=1.0),
                                    dict(name="example3", A=1.0), dict(name="example1", scheme="rk4"),
                                    dict(name="example1", dt=-1.0), dict(name="example2", n=1)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            preset(**kw)


class TestInitialConditions:
    def test_uniform(self):
        np.testing.assert_array_equal(initial_condition(Grid(3, 3), "uniform:2.5").values, 2.5)

    def test_gaussian_peak(self):
        f = initial_condition(Grid(5, 5), "gaussian:2:0.5:0.5:0.1:1")
        assert f.values[2, 2] == pytest.approx(3.0)

    def test_unknown(self):
        with pytest.raises(ValueError):
            initial_condition(Grid(3, 3), "parabola")
