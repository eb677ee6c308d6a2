"""Hydrostatic two-fluid steady states on the slab (-m, 0) u (0, ell).

The density profile solves d(P(rho0))/dx3 = -g rho0 with pressure continuity
at the interface x3 = 0, constructed by inverting the enthalpy:
rho0(x3) = h^{-1}(h(rho0_interface) - g x3) on each side.  The profile also
carries the viscosity coefficient fields eps0, delta0 and the critical
frequency xi_c = sqrt(g [rho0] / sigma) used by the dispersion analysis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .eos import PressureLaw, admissible
from .errors import ConfigurationError, DomainError, RangeError, VacuumError


@dataclass(frozen=True)
class SlabGeometry:
    """Slab depths, gravity, surface tension, optional horizontal period 2*pi*L."""

    m: float
    ell: float
    g: float
    sigma: float = 0.0
    L: float | None = None

    def __post_init__(self):
        if self.m <= 0 or self.ell <= 0:
            raise ConfigurationError("slab depths m, ell must be > 0")
        if self.g <= 0:
            raise ConfigurationError("gravitational acceleration g must be > 0")
        if self.sigma < 0:
            raise ConfigurationError("surface tension sigma must be >= 0")
        if self.L is not None and self.L <= 0:
            raise ConfigurationError("horizontal period scale L must be > 0")


class ViscosityLaw:
    """Smooth density dependence of a viscosity coefficient.

    Built-in kinds: ``constant`` (value c) and ``power`` (c * rho**p).
    """

    def __init__(self, kind="constant", c=0.1, p=0.0):
        if kind not in ("constant", "power"):
            raise ConfigurationError(f"unknown viscosity kind {kind!r}")
        self.kind, self.c, self.p = kind, float(c), float(p)

    @classmethod
    def constant(cls, c):
        return cls("constant", c=c)

    @classmethod
    def power(cls, c, p):
        return cls("power", c=c, p=p)

    def __call__(self, rho):
        if self.kind == "constant":
            return np.full_like(np.asarray(rho, dtype=float), self.c) if np.ndim(rho) else self.c
        return self.c * np.asarray(rho, dtype=float) ** self.p

    def derivative(self, rho):
        if self.kind == "constant":
            return np.zeros_like(np.asarray(rho, dtype=float)) if np.ndim(rho) else 0.0
        return self.c * self.p * np.asarray(rho, dtype=float) ** (self.p - 1.0)

    def __repr__(self):
        if self.kind == "constant":
            return f"ViscosityLaw.constant({self.c})"
        return f"ViscosityLaw.power({self.c}, {self.p})"


@dataclass(frozen=True)
class FluidViscosity:
    """Shear (eps > 0) and bulk (delta >= 0) viscosity laws for one fluid."""

    eps: ViscosityLaw = field(default_factory=lambda: ViscosityLaw.constant(0.1))
    delta: ViscosityLaw = field(default_factory=lambda: ViscosityLaw.constant(0.0))


class SteadyProfile:
    """Hydrostatic steady state with closed-form side evaluators.

    Evaluators take x3 (scalar or array) and an optional ``side`` (+1 upper,
    -1 lower) to disambiguate the interface point x3 = 0.  All evaluators are
    compositions of the enthalpy inverse, so any mesh may sample them without
    interpolation error.
    """

    def __init__(self, geometry, lower, upper, rho_minus, rho_plus, viscosity):
        self.geometry = geometry
        self.laws = {-1: lower, +1: upper}
        self.rho_minus = float(rho_minus)
        self.rho_plus = float(rho_plus)
        self.visc = {-1: viscosity[0], +1: viscosity[1]}
        self._h_at_interface = {
            -1: lower.enthalpy(rho_minus),
            +1: upper.enthalpy(rho_plus),
        }
        self.rho_jump = self.rho_plus - self.rho_minus
        g, sigma = geometry.g, geometry.sigma
        self.xi_c = math.sqrt(g * self.rho_jump / sigma) if sigma > 0 else math.inf

    # -- side handling -------------------------------------------------

    def _sides(self, x3, side):
        x3 = np.asarray(x3, dtype=float)
        if side is None:
            if np.any(x3 == 0.0):
                raise DomainError("x3 = 0 is ambiguous; pass side=+1 or side=-1")
            side_arr = np.where(x3 > 0, 1, -1)
        else:
            side_arr = np.full(x3.shape, int(side))
        if np.any((x3 < -self.geometry.m) | (x3 > self.geometry.ell)):
            raise DomainError("x3 outside the slab [-m, ell]")
        return x3, side_arr

    def _per_side(self, x3, side, fn):
        x3, side_arr = self._sides(x3, side)
        out = np.empty(x3.shape, dtype=float)
        for s in (-1, +1):
            mask = side_arr == s
            if np.any(mask):
                out[mask] = fn(s, x3[mask])
        return out if out.ndim else float(out)

    # -- primary fields ------------------------------------------------

    def density(self, x3, side=None):
        """rho0(x3) = h^{-1}(h(rho_interface) - g x3) on each side."""

        def fn(s, x):
            law = self.laws[s]
            h0 = self._h_at_interface[s]
            return law.enthalpy_inverse_vec(h0 - self.geometry.g * np.atleast_1d(x))

        return self._per_side(x3, side, fn)

    def dpressure(self, x3, side=None):
        def fn(s, x):
            rho = np.atleast_1d(self.density(x, side=s))
            return np.asarray(self.laws[s].dpressure(rho))

        return self._per_side(x3, side, fn)

    def pprime_rho(self, x3, side=None):
        """P'(rho0) * rho0, the compression modulus weighting the forms."""

        def fn(s, x):
            rho = np.atleast_1d(self.density(x, side=s))
            return np.asarray(self.laws[s].dpressure(rho)) * rho

        return self._per_side(x3, side, fn)

    def density_prime(self, x3, side=None):
        """rho0' = -g rho0 / P'(rho0), from the hydrostatic ODE."""

        def fn(s, x):
            rho = np.atleast_1d(self.density(x, side=s))
            return -self.geometry.g * rho / np.asarray(self.laws[s].dpressure(rho))

        return self._per_side(x3, side, fn)

    def pprime_rho_prime(self, x3, side=None):
        """(P'(rho0) rho0)' by the chain rule, using the hydrostatic ODE."""

        def fn(s, x):
            law = self.laws[s]
            rho = np.atleast_1d(self.density(x, side=s))
            dp = np.asarray(law.dpressure(rho))
            d2p = np.asarray(law.d2pressure(rho))
            rho_p = -self.geometry.g * rho / dp
            return (d2p * rho + dp) * rho_p

        return self._per_side(x3, side, fn)

    def eps0(self, x3, side=None):
        return self._per_side(
            x3, side, lambda s, x: np.asarray(self.visc[s].eps(np.atleast_1d(self.density(x, side=s))))
        )

    def delta0(self, x3, side=None):
        return self._per_side(
            x3, side, lambda s, x: np.asarray(self.visc[s].delta(np.atleast_1d(self.density(x, side=s))))
        )

    def eps0_prime(self, x3, side=None):
        """eps0' = eps'(rho0) rho0', avoiding numerical differentiation."""

        def fn(s, x):
            rho = np.atleast_1d(self.density(x, side=s))
            rho_p = -self.geometry.g * rho / np.asarray(self.laws[s].dpressure(rho))
            return np.asarray(self.visc[s].eps.derivative(rho)) * rho_p

        return self._per_side(x3, side, fn)

    def delta0_prime(self, x3, side=None):
        def fn(s, x):
            rho = np.atleast_1d(self.density(x, side=s))
            rho_p = -self.geometry.g * rho / np.asarray(self.laws[s].dpressure(rho))
            return np.asarray(self.visc[s].delta.derivative(rho)) * rho_p

        return self._per_side(x3, side, fn)

    def pressure(self, x3, side=None):
        def fn(s, x):
            rho = np.atleast_1d(self.density(x, side=s))
            return np.asarray(self.laws[s].pressure(rho))

        return self._per_side(x3, side, fn)


def build_profile(lower, upper, rho_minus, geometry, viscosity=None):
    """Construct and validate the hydrostatic profile.

    Parameters
    ----------
    lower, upper : PressureLaw
        Pressure laws of the lower and upper fluids.
    rho_minus : float
        Lower-fluid density at the interface; must be admissible.
    geometry : SlabGeometry
    viscosity : (FluidViscosity, FluidViscosity), optional
        Lower and upper viscosity laws; defaults to constant eps = 0.1,
        delta = 0 on both sides (the analysis fixes no particular values).

    Raises
    ------
    ConfigurationError
        If rho_minus is not admissible (no heavy-over-light interface).
    VacuumError
        If m or ell exceed the enthalpy range of the corresponding side.
    """
    if viscosity is None:
        viscosity = (FluidViscosity(), FluidViscosity())
    if rho_minus <= 0:
        raise ConfigurationError("interface density rho_minus must be > 0")
    if not admissible(lower, upper, rho_minus):
        raise ConfigurationError(
            "rho_minus = %g is not admissible: need P_-(rho) > P_+(rho) with "
            "P_-(rho) in the image of P_+" % rho_minus
        )
    rho_plus = upper.pressure_inverse(lower.pressure(rho_minus))

    g = geometry.g
    h_lo, h_hi = lower.enthalpy_range()
    h_m = lower.enthalpy(rho_minus) + g * geometry.m
    if not (h_lo < h_m < h_hi):
        raise VacuumError("lower", "depth m = %g exceeds the lower enthalpy range" % geometry.m)
    h_lo, h_hi = upper.enthalpy_range()
    h_l = upper.enthalpy(rho_plus) - g * geometry.ell
    if not (h_lo < h_l < h_hi):
        raise VacuumError("upper", "depth ell = %g reaches vacuum in the upper fluid" % geometry.ell)

    profile = SteadyProfile(geometry, lower, upper, rho_minus, rho_plus, viscosity)

    p_minus = lower.pressure(rho_minus)
    p_plus = upper.pressure(rho_plus)
    if abs(p_plus - p_minus) > 1e-10 * abs(p_minus):
        raise ConfigurationError(
            "interface pressure mismatch %.3e exceeds tolerance" % abs(p_plus - p_minus)
        )
    if profile.rho_jump <= 0:
        raise ConfigurationError("density jump across the interface must be > 0")
    return profile


def verify_hydrostatic(profile, n_check=64, h_fd=1e-4):
    """Max residual of d(P(rho0))/dx3 + g rho0 over interior check points.

    Uses centered differences of step ``h_fd``; the residual is O(h_fd^2)
    for smooth pressure laws.
    """
    geom = profile.geometry
    out = 0.0
    for s, a, b in ((-1, -geom.m, 0.0), (+1, 0.0, geom.ell)):
        pad = max(2 * h_fd, 1e-3 * (b - a))
        x = np.linspace(a + pad, b - pad, n_check)
        dP = (profile.pressure(x + h_fd, side=s) - profile.pressure(x - h_fd, side=s)) / (2 * h_fd)
        resid = np.abs(dP + geom.g * profile.density(x, side=s))
        out = max(out, float(np.max(resid)))
    return out
