"""Growth rates per frequency via the monotone fixed point s = lambda(xi, s).

For each frequency magnitude the modified family has mu(s) strictly
increasing, so F(s) = s - sqrt(max(-mu(s), 0)) is strictly increasing and
its unique root is the growth rate of a true growing mode.  Bisection is
used rather than Newton: the theory supplies monotonicity and continuity
but no smoothness in s.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigen import smallest_eig
from .errors import ConfigurationError, DomainError, SolverError
from .forms import assemble
from .residuals import jump_residuals, strong_form_residual

FIXED_POINT_TOL = 1e-9
_S_LO = 1e-8
_MAX_DOUBLINGS = 60
_MAX_BISECT = 200


@dataclass
class Stable:
    """Marker result: no growing mode at this frequency magnitude."""

    xi: float
    reason: str


@dataclass
class ModeSolution:
    """A growing normal mode in the reduced frame xi = (|xi|, 0).

    phi, psi are nodal profiles of the J-normalized minimizer; theta
    vanishes identically in this frame and is reintroduced by rotation in
    the synthesis stage.
    """

    xi: np.ndarray                # 2D frequency vector, reduced frame
    lam: float
    s_star: float
    phi: np.ndarray
    psi: np.ndarray
    psi0: float
    fixed_point_residual: float
    ode_residual: float
    jump_residuals: np.ndarray
    minimizer: np.ndarray = field(repr=False)
    forms: object = field(repr=False, default=None)

    @property
    def xi_mag(self):
        return float(np.hypot(self.xi[0], self.xi[1]))


class _MuEvaluator:
    """mu(s) with warm starts and a safe adaptive shift from the bracket."""

    def __init__(self, forms):
        self.forms = forms
        self.v0 = None
        self.mu_floor = -forms.g * forms.xi  # exact discrete lower bound
        self.best_known_floor = self.mu_floor
        self.last = None

    def __call__(self, s):
        gap = max(1e-8, 1e-4 * abs(self.best_known_floor) + 1e-10)
        res = smallest_eig(self.forms, s, v0=self.v0, sigma=self.best_known_floor - gap)
        self.v0 = res.minimizer
        self.last = res
        return res.mu

    def raise_floor(self, mu_at_bracket_lo):
        # monotonicity: mu(s) >= mu(s_lo) inside the bracket
        self.best_known_floor = max(self.best_known_floor, mu_at_bracket_lo)


def growth_rate(profile, mesh, xi_mag, tol=FIXED_POINT_TOL, forms=None):
    """Solve for the growing mode at one frequency, or certify stability.

    Returns a :class:`ModeSolution` with lambda = s_star at the fixed point,
    or :class:`Stable` when sigma > 0 and xi >= xi_c (no growing mode
    exists) or when the modified energy is nonnegative at vanishing s.
    """
    if xi_mag <= 0:
        raise DomainError("frequency magnitude must be > 0")
    sigma = profile.geometry.sigma
    if sigma > 0 and xi_mag >= profile.xi_c:
        return Stable(xi_mag, "sigma |xi|^2 >= g [rho0]: surface tension closes the window")

    if forms is None:
        forms = assemble(profile, mesh, xi_mag)
    mu = _MuEvaluator(forms)

    mu_lo = mu(_S_LO)
    if mu_lo >= 0 or _S_LO - math.sqrt(-mu_lo) > 0:
        if sigma > 0 and xi_mag < profile.xi_c:
            warnings.warn(
                "mu(%g) = %.3e >= 0 at xi = %g inside the unstable window; "
                "the mesh may be too coarse to resolve the mode" % (_S_LO, mu_lo, xi_mag),
                RuntimeWarning,
            )
        return Stable(xi_mag, "modified energy nonnegative as s -> 0")

    F = lambda s, mu_s: s - math.sqrt(max(-mu_s, 0.0))
    s_lo, f_lo = _S_LO, F(_S_LO, mu_lo)
    mu.raise_floor(mu_lo)

    s_hi = max(10 * _S_LO, 1e-3)
    f_hi = None
    for _ in range(_MAX_DOUBLINGS):
        mu_hi = mu(s_hi)
        f_hi = F(s_hi, mu_hi)
        if mu_hi >= 0 or f_hi > 0:
            break
        s_lo, f_lo = s_hi, f_hi
        mu.raise_floor(mu_hi)
        s_hi *= 2.0
    else:
        raise SolverError(
            "failed to bracket the fixed point after %d doublings" % _MAX_DOUBLINGS,
            {"xi": xi_mag, "s_hi": s_hi, "f_hi": f_hi},
        )

    s_star, f_star = s_hi, f_hi
    for _ in range(_MAX_BISECT):
        s_mid = 0.5 * (s_lo + s_hi)
        mu_mid = mu(s_mid)
        f_mid = F(s_mid, mu_mid)
        if f_mid >= 0:
            s_hi, f_hi = s_mid, f_mid
        else:
            s_lo, f_lo = s_mid, f_mid
            mu.raise_floor(mu_mid)
        s_star, f_star = s_mid, f_mid
        if abs(f_mid) <= tol:
            break
    else:
        raise SolverError(
            "fixed-point bisection stalled at |F| = %.3e" % abs(f_star),
            {"xi": xi_mag, "s": s_star},
        )

    res = mu.last if mu.last is not None and mu.last.s == s_star else None
    if res is None:
        res = smallest_eig(forms, s_star, v0=mu.v0)
    lam = s_star
    phi, psi = forms.to_nodal(res.minimizer)
    return ModeSolution(
        xi=np.array([xi_mag, 0.0]),
        lam=lam,
        s_star=s_star,
        phi=phi,
        psi=psi,
        psi0=forms.psi_trace(res.minimizer),
        fixed_point_residual=abs(f_star),
        ode_residual=strong_form_residual(profile, mesh, phi, psi, xi_mag, s_star, -lam**2),
        jump_residuals=jump_residuals(profile, mesh, phi, psi, xi_mag, s_star),
        minimizer=res.minimizer,
        forms=forms,
    )


@dataclass
class DispersionCurve:
    """Sampled dispersion relation lambda(|xi|) with its maximum."""

    xi: np.ndarray
    lam: np.ndarray
    s_star: np.ndarray
    psi0: np.ndarray
    residual: np.ndarray
    Lambda: float
    argmax_xi: float
    fit_correction: float      # Lambda minus the best sampled rate
    argmax_mode: ModeSolution | None = field(repr=False, default=None)

    @property
    def endpoint_rates(self):
        return float(self.lam[0]), float(self.lam[-1])


def _solve_many(profile, mesh, mags, threads):
    """growth_rate over a frequency list; results merged in input order.

    Per-frequency solves share nothing, so any thread count reproduces the
    single-threaded output exactly.
    """
    if threads <= 1:
        return [growth_rate(profile, mesh, float(m)) for m in mags]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda m: growth_rate(profile, mesh, float(m)), mags))


def sweep(profile, mesh, xi_min, xi_max, n=48, refine_peak=True, threads=1):
    """Log-spaced dispersion sweep over [xi_min, xi_max].

    Records the sampled maximum Lambda with a quadratic-fit refinement
    around the argmax (the refined frequency is solved, never
    extrapolated), and the endpoint rates for the zero-limit check.
    """
    if not (0 < xi_min < xi_max):
        raise ConfigurationError("need 0 < xi_min < xi_max")
    sigma = profile.geometry.sigma
    if sigma > 0 and xi_max > profile.xi_c:
        raise ConfigurationError(
            "xi_max exceeds the critical frequency %.6g" % profile.xi_c
        )
    mags = np.geomspace(xi_min, xi_max, n) if n > 1 else np.array([xi_min])
    rows = []
    argmax_mode = None
    for m, r in zip(mags, _solve_many(profile, mesh, mags, threads)):
        if isinstance(r, Stable):
            rows.append((m, 0.0, 0.0, 0.0, 0.0))
            continue
        rows.append((m, r.lam, r.s_star, r.psi0, r.fixed_point_residual))
        if argmax_mode is None or r.lam > argmax_mode.lam:
            argmax_mode = r
    arr = np.array(rows)
    xi_s, lam_s = arr[:, 0], arr[:, 1]
    k = int(np.argmax(lam_s))
    Lambda = float(lam_s[k])
    argmax_xi = float(xi_s[k])
    fit_correction = 0.0

    if refine_peak and n >= 3 and 0 < k < n - 1:
        x3 = xi_s[k - 1 : k + 2]
        y3 = lam_s[k - 1 : k + 2]
        denom = (x3[0] - x3[1]) * (x3[0] - x3[2]) * (x3[1] - x3[2])
        if denom != 0:
            a = (x3[2] * (y3[1] - y3[0]) + x3[1] * (y3[0] - y3[2]) + x3[0] * (y3[2] - y3[1])) / denom
            b = (x3[2] ** 2 * (y3[0] - y3[1]) + x3[1] ** 2 * (y3[2] - y3[0]) + x3[0] ** 2 * (y3[1] - y3[2])) / denom
            if a < 0:
                xv = -b / (2 * a)
                if x3[0] < xv < x3[2]:
                    r = growth_rate(profile, mesh, float(xv))
                    if not isinstance(r, Stable) and r.lam > Lambda:
                        fit_correction = r.lam - Lambda
                        Lambda, argmax_xi, argmax_mode = r.lam, float(xv), r

    return DispersionCurve(
        xi=xi_s, lam=lam_s, s_star=arr[:, 2], psi0=arr[:, 3], residual=arr[:, 4],
        Lambda=Lambda, argmax_xi=argmax_xi, fit_correction=fit_correction,
        argmax_mode=argmax_mode,
    )


@dataclass
class LatticeResult:
    """Rates on the frequency lattice (1/L) Z^2, or a stability certificate."""

    L: float
    points: np.ndarray          # columns k1, k2, |xi|, lambda
    magnitudes: np.ndarray
    rates: np.ndarray
    Lambda_L: float
    certificate: bool           # True: empty unstable set (small-L stability)
    modes: dict = field(repr=False, default_factory=dict)

    @property
    def unstable_count(self):
        return int(np.sum(self.points[:, 3] > 0)) if self.points.size else 0


def lattice_modes(profile, mesh, L, xi_max=None, threads=1):
    """Enumerate unstable lattice frequencies and their rates.

    Rates depend on |xi| only, so lattice points are grouped by magnitude
    and each magnitude is solved once.  For sigma > 0 the enumeration is
    capped by xi_c; for sigma = 0 a finite cap ``xi_max`` must be supplied.
    When L <= sqrt(sigma / (g [rho0])) the unstable set is empty and a
    stability certificate is returned.
    """
    if L <= 0:
        raise ConfigurationError("period scale L must be > 0")
    sigma = profile.geometry.sigma
    if sigma > 0:
        # the small-period dichotomy is on L itself: at or below the
        # threshold the smallest nonzero magnitude 1/L already reaches xi_c
        threshold = math.sqrt(sigma / (profile.geometry.g * profile.rho_jump))
        if L <= threshold:
            return LatticeResult(
                L=L, points=np.zeros((0, 4)), magnitudes=np.zeros(0),
                rates=np.zeros(0), Lambda_L=0.0, certificate=True,
            )
        cap = profile.xi_c
    else:
        if xi_max is None:
            raise ConfigurationError("sigma = 0 leaves the lattice unbounded; pass xi_max")
        cap = float(xi_max)

    kmax = int(math.floor(cap * L)) + 1
    pts = []
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(-kmax, kmax + 1):
            if k1 == 0 and k2 == 0:
                continue
            mag = math.hypot(k1, k2) / L
            if mag < cap:
                pts.append((k1, k2, mag))

    if not pts:
        return LatticeResult(
            L=L, points=np.zeros((0, 4)), magnitudes=np.zeros(0), rates=np.zeros(0),
            Lambda_L=0.0, certificate=True,
        )

    mags = sorted({round(p[2], 12) for p in pts})
    rate_of = {}
    modes = {}
    for m, r in zip(mags, _solve_many(profile, mesh, mags, threads)):
        if isinstance(r, Stable):
            rate_of[m] = 0.0
        else:
            rate_of[m] = r.lam
            modes[m] = r
    rows = [(k1, k2, mag, rate_of[round(mag, 12)]) for k1, k2, mag in pts]
    rows.sort(key=lambda t: (t[2], t[0], t[1]))
    points = np.array(rows)
    rates = np.array([rate_of[m] for m in mags])
    return LatticeResult(
        L=L, points=points, magnitudes=np.array(mags), rates=rates,
        Lambda_L=float(rates.max()), certificate=False, modes=modes,
    )
