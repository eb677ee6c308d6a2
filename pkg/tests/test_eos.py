import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rtmodes as rt
from rtmodes.errors import DomainError, RangeError


def test_pressure_polytropic_values():
    assert rt.PressureLaw.polytropic(1, 1).pressure(1.0) == pytest.approx(1.0)
    assert rt.PressureLaw.polytropic(2, 1).pressure(3.0) == pytest.approx(6.0)
    # 8^(5/3) = 32
    assert rt.PressureLaw.polytropic(1, 5 / 3).pressure(8.0) == pytest.approx(32.0, rel=1e-14)


def test_pressure_domain_errors():
    law = rt.PressureLaw.polytropic(1, 1.4)
    with pytest.raises(DomainError):
        law.pressure(0.0)
    with pytest.raises(DomainError):
        law.pressure(-1.0)


def test_enthalpy_closed_forms():
    assert rt.PressureLaw.polytropic(1, 1).enthalpy(1.0) == pytest.approx(0.0, abs=1e-15)
    # K ln(rho): 2 ln(e) = 2
    assert rt.PressureLaw.polytropic(2, 1).enthalpy(math.e) == pytest.approx(2.0, rel=1e-14)
    # K gamma/(gamma-1) (rho^{gamma-1} - 1): 2 (3 - 1) = 4
    assert rt.PressureLaw.polytropic(1, 2).enthalpy(3.0) == pytest.approx(4.0, rel=1e-14)


def test_enthalpy_inverse_values():
    assert rt.PressureLaw.polytropic(1, 1).enthalpy_inverse(0.0) == pytest.approx(1.0)
    assert rt.PressureLaw.polytropic(2, 1).enthalpy_inverse(2.0) == pytest.approx(math.e, rel=1e-13)
    # gamma = 2: image of h is (-2, inf); h = -2 is the vacuum boundary
    with pytest.raises(RangeError):
        rt.PressureLaw.polytropic(1, 2).enthalpy_inverse(-2.0)


@pytest.mark.parametrize("K,gamma", [(1.0, 1.0), (2.0, 1.0), (1.0, 5 / 3), (0.7, 2.4)])
def test_enthalpy_roundtrip(K, gamma):
    law = rt.PressureLaw.polytropic(K, gamma)
    for rho in np.geomspace(0.1, 10.0, 23):
        back = law.enthalpy_inverse(law.enthalpy(rho))
        assert abs(back - rho) <= 1e-10 * rho


@given(
    st.floats(0.1, 10.0),
    st.floats(0.1, 10.0),
    st.floats(0.2, 5.0),
    st.floats(1.0, 3.0),
)
@settings(max_examples=60, deadline=None)
def test_enthalpy_strictly_increasing(r1, r2, K, gamma):
    law = rt.PressureLaw.polytropic(K, gamma)
    lo, hi = sorted((r1, r2))
    if hi - lo > 1e-9:
        assert law.enthalpy(lo) < law.enthalpy(hi)


def test_admissible_isothermal():
    k2 = rt.PressureLaw.polytropic(2, 1)
    k1 = rt.PressureLaw.polytropic(1, 1)
    assert rt.admissible(k2, k1, 1.0)       # K- > K+ suffices for equal gamma
    assert not rt.admissible(k1, k2, 1.0)


def test_admissible_unequal_gamma():
    # gamma- = 2 > gamma+ = 1, K = 1 both: admissible iff rho > (K+/K-)^{1/(g- - g+)} = 1
    lower = rt.PressureLaw.polytropic(1, 2)
    upper = rt.PressureLaw.polytropic(1, 1)
    assert rt.admissible(lower, upper, 2.0)
    assert not rt.admissible(lower, upper, 0.5)


@pytest.mark.parametrize("Km,Kp,gm,gp", [(2, 1, 1, 1), (1, 1, 2, 1), (1, 2, 1, 3), (3, 2, 1.4, 1.4)])
def test_admissible_matches_polytropic_inequalities(Km, Kp, gm, gp):
    lower = rt.PressureLaw.polytropic(Km, gm)
    upper = rt.PressureLaw.polytropic(Kp, gp)
    for rho in np.geomspace(0.2, 5.0, 17):
        explicit = Km * rho**gm > Kp * rho**gp   # P_- > P_+; image of P_+ is (0, inf)
        assert rt.admissible(lower, upper, rho) == explicit


@pytest.fixture(scope="module")
def pair():
    rho = np.geomspace(0.05, 20.0, 400)
    poly = rt.PressureLaw.polytropic(1.3, 1.4)
    tab = rt.PressureLaw.tabulated(rho, poly.pressure(rho))
    return poly, tab


class TestTabulated:
    def test_matches_polytropic(self, pair):
        poly, tab = pair
        for rho in (0.1, 0.7, 1.0, 3.3, 9.0):
            assert tab.pressure(rho) == pytest.approx(poly.pressure(rho), rel=1e-6)
            assert tab.dpressure(rho) == pytest.approx(poly.dpressure(rho), rel=1e-4)
            assert tab.enthalpy(rho) == pytest.approx(poly.enthalpy(rho), rel=1e-5, abs=1e-8)

    def test_inverse_consistency(self, pair):
        _, tab = pair
        for rho in (0.1, 1.0, 5.0):
            h = tab.enthalpy(rho)
            back = tab.enthalpy_inverse(h)
            assert abs(tab.enthalpy(back) - h) <= 1e-11 * (1 + abs(h))

    def test_working_range_enforced(self, pair):
        _, tab = pair
        with pytest.raises(DomainError):
            tab.pressure(0.01)
        with pytest.raises(DomainError):
            tab.pressure(40.0)
        with pytest.raises(RangeError):
            tab.enthalpy_inverse(1e9)

    def test_monotone_derivative_positive(self, pair):
        _, tab = pair
        xs = np.geomspace(tab.rho_min, tab.rho_max, 1000)
        assert np.all(tab.dpressure(xs) > 0)

    def test_rejects_nonmonotone_samples(self):
        with pytest.raises(DomainError):
            rt.PressureLaw.tabulated([1.0, 2.0, 1.5], [1.0, 2.0, 3.0])
        with pytest.raises(DomainError):
            rt.PressureLaw.tabulated([1.0, 2.0, 3.0], [1.0, 1.0, 3.0])
