import numpy as np
import pytest

from pnpflow import BoundarySpec, Field, Grid, PositivityError, ProblemSpec, SpeciesSpec, State, validate
from pnpflow.model import charge_density, chemical_potential, initial_state
from pnpflow.presets import example4

from conftest import neutral_pair


class TestValidate:
    def test_neutral_pair_ok(self):
        assert validate(neutral_pair(Grid(8, 8))) == []

    def test_single_charged_species_not_neutral(self):
        g = Grid(4, 4)
        spec = ProblemSpec(g, (SpeciesSpec("c", 1.0, 1.0, Field.constant(g, 1.0)),))
        assert any("electroneutrality" in p for p in validate(spec))

    def test_example4_is_neutral(self):
        spec = example4(n=8)
        assert validate(spec) == []

    def test_collects_several_problems(self):
        g = Grid(4, 4)
        c = Field(g, np.r_[-1.0, np.ones(15)])
        spec = ProblemSpec(g, (SpeciesSpec("a", 1.0, -2.0, c), SpeciesSpec("a", -1.0, 1.0, Field.constant(g, 1.0))),
                           eps=0.0, bc_mu=BoundarySpec.dirichlet(0.0))
        problems = validate(spec)
        for needle in ("unique", "diffusivity", "positive", "permittivity", "bc_mu"):
            assert any(needle in p for p in problems), needle

    def test_inhomogeneous_dirichlet_potential_rejected(self):
        spec = neutral_pair(Grid(4, 4), bc=BoundarySpec.zero_flux())
        spec = ProblemSpec(spec.grid, spec.species, bc_phi=BoundarySpec.dirichlet(1.0))
        assert any("homogeneous" in p for p in validate(spec))

    def test_periodicity_mismatch(self):
        g = Grid(4, 4)
        spec = neutral_pair(g)
        spec = ProblemSpec(g, spec.species, bc_mu=BoundarySpec.periodic(), bc_phi=BoundarySpec.zero_flux())
        assert any("periodicity" in p for p in validate(spec))


class TestChemicalPotential:
    g = Grid(3, 3)

    @pytest.mark.parametrize("c,z,phi,phi_e,expected", [
        (1.0, 1.0, 0.0, 0.0, 0.0),
        (np.e, 1.0, 0.4, 0.6, 2.0),
        (1.0, -1.0, 0.0, 0.5, -0.5),
    ])
    def test_values(self, c, z, phi, phi_e, expected):
        f = lambda v: Field.constant(self.g, v)
        mu = chemical_potential(f(c), f(phi), f(phi_e), z)
        np.testing.assert_allclose(mu.values, expected, atol=1e-15)

    def test_nonpositive(self):
        f = Field(self.g, np.r_[0.0, np.ones(8)])
        zero = Field.constant(self.g, 0.0)
        with pytest.raises(PositivityError):
            chemical_potential(f, zero, zero, 1.0)


class TestChargeDensity:
    def test_neutral_uniform(self):
        spec = neutral_pair(Grid(4, 4))
        st = initial_state(spec)
        np.testing.assert_array_equal(charge_density(st, spec).values, 0.0)

    def test_example4_initial_neutral(self):
        spec = example4(n=8)
        st = initial_state(spec)
        np.testing.assert_allclose(charge_density(st, spec).values, 0.0, atol=1e-15)

    def test_single_species_with_background(self):
        g = Grid(2, 2)
        spec = ProblemSpec(g, (SpeciesSpec("c", 3.0, 1.0, Field.constant(g, 2.0)),), rho0=1.0)
        st = State((Field.constant(g, 2.0),), Field.constant(g, 0.0))
        np.testing.assert_allclose(charge_density(st, spec).values, 7.0)

    def test_linear_in_each_species(self, rng):
        g = Grid(4, 4)
        spec = neutral_pair(g)
        p, n = rng.uniform(0.5, 2, g.shape), rng.uniform(0.5, 2, g.shape)
        phi = Field.constant(g, 0.0)
        rho = lambda a, b: charge_density(State((Field(g, a), Field(g, b)), phi), spec).values
        np.testing.assert_allclose(rho(2 * p, n) - rho(p, n), rho(p, n) - rho(0 * p, n), atol=1e-14)


def test_initial_potential_solves_poisson(rng):
    from pnpflow.operators import neg_div_eps_grad

    g = Grid(8, 8)
    p = rng.uniform(0.5, 1.5, g.shape)
    n = p.mean() + 0 * p
    spec = neutral_pair(g, p=Field(g, p), n=Field(g, n), eps=0.5)
    st = initial_state(spec)
    lhs = neg_div_eps_grad(st.phi, 0.5, spec.bc_phi).values
    np.testing.assert_allclose(lhs, p - n, atol=1e-9)
    assert abs(st.phi.values.mean()) < 1e-12
