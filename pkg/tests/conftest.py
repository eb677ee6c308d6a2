import numpy as np
import pytest

import rtmodes as rt


def make_profile(sigma=0.1, eps=0.1, delta=0.0, g=1.0, m=1.0, ell=1.0,
                 K_lower=2.0, K_upper=1.0, rho_minus=1.0, L=None):
    """Isothermal two-fluid slab used throughout: K- = 2, K+ = 1, gamma = 1."""
    lower = rt.PressureLaw.polytropic(K_lower, 1.0)
    upper = rt.PressureLaw.polytropic(K_upper, 1.0)
    geom = rt.SlabGeometry(m=m, ell=ell, g=g, sigma=sigma, L=L)
    visc = (
        rt.FluidViscosity(rt.ViscosityLaw.constant(eps), rt.ViscosityLaw.constant(delta)),
        rt.FluidViscosity(rt.ViscosityLaw.constant(eps), rt.ViscosityLaw.constant(delta)),
    )
    return rt.build_profile(lower, upper, rho_minus, geom, visc)


@pytest.fixture(scope="session")
def profile():
    return make_profile()


@pytest.fixture(scope="session")
def profile_sigma0():
    return make_profile(sigma=0.0)


@pytest.fixture(scope="session")
def mesh32():
    return rt.Mesh.uniform(1.0, 1.0, 32, order=2)


@pytest.fixture(scope="session")
def mesh64():
    return rt.Mesh.uniform(1.0, 1.0, 64, order=2)


@pytest.fixture(scope="session")
def forms_xi1(profile, mesh64):
    return rt.assemble(profile, mesh64, 1.0)


@pytest.fixture(scope="session")
def mode_xi1(profile, mesh64):
    m = rt.growth_rate(profile, mesh64, 1.0)
    assert not isinstance(m, rt.Stable)
    return m


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
