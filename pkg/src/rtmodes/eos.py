"""Barotropic pressure laws, enthalpies, and the Rayleigh-Taylor admissibility test.

Each fluid is described by a strictly increasing pressure law P(rho).  The
enthalpy h(rho) = int_1^rho P'(r)/r dr and its inverse drive the hydrostatic
profile construction.  Two kinds are supported: polytropic P = K rho^gamma
(closed forms throughout) and tabulated (monotone cubic interpolation of
(rho, P) samples, quadrature + bisection for the enthalpy pair).
"""

import math
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DomainError, RangeError

# Quadrature / inversion tolerances.  Fixed well below mesh discretization
# error so profile evaluation never dominates the error budget.
_QUAD_RTOL = 1e-12
_INV_TOL = 1e-11
_DPDRHO_FLOOR = 1e-12


class PressureLaw:
    """A barotropic pressure law P(rho) with derivatives and enthalpy.

    Use the constructors :meth:`polytropic` or :meth:`tabulated`.
    """

    def __init__(self, kind, **params):
        self.kind = kind
        if kind == "polytropic":
            K, gamma = params["K"], params["gamma"]
            if K <= 0:
                raise DomainError("polytropic pressure scale K must be > 0")
            if gamma < 1:
                raise DomainError("adiabatic exponent gamma must be >= 1")
            self.K, self.gamma = float(K), float(gamma)
            self.rho_min, self.rho_max = 0.0, math.inf
        elif kind == "tabulated":
            rho = np.asarray(params["rho"], dtype=float)
            P = np.asarray(params["P"], dtype=float)
            if rho.ndim != 1 or rho.shape != P.shape or rho.size < 2:
                raise DomainError("tabulated law needs matching 1D (rho, P) samples")
            if np.any(np.diff(rho) <= 0) or np.any(np.diff(P) <= 0):
                raise DomainError("tabulated (rho, P) samples must be strictly increasing")
            if rho[0] <= 0 or P[0] <= 0:
                raise DomainError("tabulated samples must have rho > 0 and P > 0")
            # Shape-preserving cubic keeps P' >= 0 structurally; on strictly
            # increasing data the interior derivative is positive.
            self._interp = PchipInterpolator(rho, P)
            self._dinterp = self._interp.derivative()
            self._d2interp = self._interp.derivative(2)
            self.rho_min, self.rho_max = float(rho[0]), float(rho[-1])
            self._check_derivative_floor(rho)
        else:
            raise DomainError(f"unknown pressure law kind {kind!r}")

    @classmethod
    def polytropic(cls, K, gamma):
        return cls("polytropic", K=K, gamma=gamma)

    @classmethod
    def tabulated(cls, rho, P):
        return cls("tabulated", rho=rho, P=P)

    def _check_derivative_floor(self, rho):
        # The analysis needs 1/P' locally bounded; PCHIP endpoint slopes can
        # collapse on pathological data, so enforce a machine-positive floor.
        dense = np.linspace(self.rho_min, self.rho_max, 64 * rho.size)
        dmin = float(np.min(self._dinterp(dense)))
        if dmin < _DPDRHO_FLOOR * (self._interp(self.rho_max) / self.rho_max):
            raise DomainError(
                "tabulated law has vanishing dP/drho (min %.3e); "
                "supply samples with strictly positive slope" % dmin
            )

    def _require_in_range(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0):
            raise DomainError("density must be > 0")
        if np.any(rho < self.rho_min) or np.any(rho > self.rho_max):
            raise DomainError(
                "density outside working range [%g, %g]" % (self.rho_min, self.rho_max)
            )
        return rho

    def pressure(self, rho):
        """P(rho).  Strictly increasing on the working range."""
        rho = self._require_in_range(rho)
        if self.kind == "polytropic":
            out = self.K * rho**self.gamma
        else:
            out = self._interp(rho)
        return out if out.ndim else float(out)

    def dpressure(self, rho):
        """P'(rho) > 0."""
        rho = self._require_in_range(rho)
        if self.kind == "polytropic":
            out = self.K * self.gamma * rho ** (self.gamma - 1.0)
        else:
            out = self._dinterp(rho)
        return out if out.ndim else float(out)

    def d2pressure(self, rho):
        """P''(rho) (piecewise for tabulated laws)."""
        rho = self._require_in_range(rho)
        if self.kind == "polytropic":
            out = self.K * self.gamma * (self.gamma - 1.0) * rho ** (self.gamma - 2.0)
        else:
            out = self._d2interp(rho)
        return out if out.ndim else float(out)

    def enthalpy(self, rho):
        """h(rho) = int_1^rho P'(r)/r dr.

        Closed form for polytropic laws; adaptive quadrature (relative
        tolerance 1e-12) for tabulated laws.
        """
        rho = self._require_in_range(rho)
        if self.kind == "polytropic":
            if self.gamma == 1.0:
                out = self.K * np.log(rho)
            else:
                g = self.gamma
                out = self.K * g / (g - 1.0) * (rho ** (g - 1.0) - 1.0)
            return out if out.ndim else float(out)
        if rho.ndim:
            return np.array([self.enthalpy(float(r)) for r in rho])
        base = min(max(1.0, self.rho_min), self.rho_max)
        with warnings.catch_warnings():
            # at rtol 1e-12 the integrator may flag roundoff; accuracy is
            # still far below mesh discretization error
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(
                lambda r: self._dinterp(r) / r, base, float(rho),
                epsabs=0.0, epsrel=_QUAD_RTOL, limit=200,
            )
        return val

    def enthalpy_range(self):
        """(h_lo, h_hi): the open image of the enthalpy on the working range."""
        if self.kind == "polytropic":
            if self.gamma == 1.0:
                return (-math.inf, math.inf)
            g = self.gamma
            return (-self.K * g / (g - 1.0), math.inf)
        return (self.enthalpy(self.rho_min), self.enthalpy(self.rho_max))

    def enthalpy_inverse(self, h):
        """rho with enthalpy(rho) = h, to 1e-11*(1+|h|).

        Raises :class:`RangeError` when h lies outside the enthalpy image;
        physically this is the vacuum boundary of the hydrostatic profile.
        """
        h = float(h)
        lo, hi = self.enthalpy_range()
        if not (lo < h < hi):
            raise RangeError(
                "enthalpy %g outside attainable range (%g, %g)" % (h, lo, hi)
            )
        if self.kind == "polytropic":
            if self.gamma == 1.0:
                return math.exp(h / self.K)
            g = self.gamma
            return (1.0 + (g - 1.0) * h / (self.K * g)) ** (1.0 / (g - 1.0))
        rho = brentq(
            lambda r: self.enthalpy(r) - h, self.rho_min, self.rho_max,
            xtol=1e-15, rtol=8.9e-16, maxiter=200,
        )
        if abs(self.enthalpy(rho) - h) > _INV_TOL * (1.0 + abs(h)):
            raise RangeError("enthalpy inversion failed to meet tolerance")
        return float(rho)

    def enthalpy_inverse_vec(self, h):
        """Vectorized enthalpy inverse (closed form for polytropic laws)."""
        h = np.asarray(h, dtype=float)
        lo, hi = self.enthalpy_range()
        if np.any(h <= lo) or np.any(h >= hi):
            raise RangeError("enthalpy values outside attainable range (%g, %g)" % (lo, hi))
        if self.kind == "polytropic":
            if self.gamma == 1.0:
                return np.exp(h / self.K)
            g = self.gamma
            return (1.0 + (g - 1.0) * h / (self.K * g)) ** (1.0 / (g - 1.0))
        return np.array([self.enthalpy_inverse(float(v)) for v in np.atleast_1d(h)])

    def pressure_inverse(self, p):
        """rho with P(rho) = p; :class:`RangeError` if p is not attained."""
        p = float(p)
        if self.kind == "polytropic":
            if p <= 0:
                raise RangeError("pressure must be > 0")
            return (p / self.K) ** (1.0 / self.gamma)
        p_lo = float(self._interp(self.rho_min))
        p_hi = float(self._interp(self.rho_max))
        if not (p_lo <= p <= p_hi):
            raise RangeError("pressure %g outside tabulated image [%g, %g]" % (p, p_lo, p_hi))
        return float(brentq(lambda r: self._interp(r) - p, self.rho_min, self.rho_max,
                            xtol=1e-15, rtol=8.9e-16, maxiter=200))

    def pressure_image(self):
        if self.kind == "polytropic":
            return (0.0, math.inf)
        return (float(self._interp(self.rho_min)), float(self._interp(self.rho_max)))

    def __repr__(self):
        if self.kind == "polytropic":
            return f"PressureLaw.polytropic(K={self.K}, gamma={self.gamma})"
        return f"PressureLaw.tabulated(<{self.rho_min}..{self.rho_max}>)"


def admissible(lower, upper, rho_minus):
    """Whether rho_minus yields a heavy-over-light (Rayleigh-Taylor) interface.

    True iff P_-(rho_minus) > P_+(rho_minus) and P_-(rho_minus) lies in the
    image of P_+, so the pressure-matching density on the upper side exists
    and exceeds rho_minus.
    """
    if rho_minus <= 0:
        raise DomainError("interface density must be > 0")
    p_minus = lower.pressure(rho_minus)
    lo, hi = upper.pressure_image()
    if not (lo < p_minus < hi):
        return False
    return p_minus > upper.pressure(rho_minus)
