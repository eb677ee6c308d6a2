"""3D growing solutions from 1D mode profiles.

A reduced-frame mode (phi, psi) at frequency magnitude r generates the whole
circle |xi| = r by rotation equivariance: (phi, theta)(xi) = R^{-1} (phi, 0)
where R xi = (r, 0), with psi unchanged.  Periodic solutions are a single
conjugate pair of lattice modes; non-periodic solutions superpose a radial
bump f of frequencies over an annulus inside (0, xi_c), evaluated with a
Gauss-Legendre radial x trapezoid angular rule (the angular factor reduces
to Bessel functions when preferred).  Norms live in the piecewise Sobolev
spaces: full regularity on each fluid domain, none across the interface.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0, j1

from .dispersion import Stable, growth_rate, lattice_modes
from .errors import ConfigurationError, DomainError
from .residuals import ode_second_derivatives

_MAX_SOBOLEV_ORDER = 2   # x3-derivative bootstrap depth for (phi, psi)


@dataclass
class NormalMode3D:
    """w_hat(xi, x3) = (-i phi, -i theta, psi) for one planar frequency."""

    xi: np.ndarray
    lam: float
    phi: np.ndarray     # nodal amplitude of the e_1 component
    theta: np.ndarray   # nodal amplitude of the e_2 component
    psi: np.ndarray
    mesh: object

    def w_hat(self, x3, side=None):
        """Complex triple at heights x3."""
        f = self.mesh.eval_nodal(self.phi, x3, side=side)
        t = self.mesh.eval_nodal(self.theta, x3, side=side)
        p = self.mesh.eval_nodal(self.psi, x3, side=side)
        return np.stack([-1j * f, -1j * t, p], axis=-1)


def extend_to_plane(mode, xi_vec):
    """Rotate a reduced-frame mode onto the frequency vector xi_vec.

    Exact by construction: (phi, theta) = R^{-1}(phi_reduced, 0) with psi
    fixed, for the rotation R carrying xi_vec to (|xi_vec|, 0).
    """
    xi_vec = np.asarray(xi_vec, dtype=float)
    mag = float(np.hypot(xi_vec[0], xi_vec[1]))
    if abs(mag - mode.xi_mag) > 1e-12 * max(1.0, mode.xi_mag):
        raise DomainError(
            "frequency magnitude %.17g does not match the mode's %.17g" % (mag, mode.xi_mag)
        )
    c, s = xi_vec[0] / mag, xi_vec[1] / mag
    return NormalMode3D(
        xi=xi_vec, lam=mode.lam,
        phi=c * mode.phi, theta=s * mode.phi, psi=mode.psi.copy(),
        mesh=mode.forms.mesh,
    )


class BumpProfile:
    """Standard compactly supported bump amp * exp(-1/(1-u^2)) on [a, b]."""

    def __init__(self, a, b, amp=1.0):
        if not (0 < a < b):
            raise ConfigurationError("bump support needs 0 < a < b")
        self.a, self.b, self.amp = float(a), float(b), float(amp)

    @classmethod
    def default(cls, xi_c, amp=1.0):
        """Supported on the middle 40% of (0, xi_c)."""
        if not math.isfinite(xi_c):
            raise ConfigurationError("default bump needs a finite xi_c; pass a, b explicitly")
        return cls(0.3 * xi_c, 0.7 * xi_c, amp)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        u = (2 * r - self.a - self.b) / (self.b - self.a)
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        out[inside] = self.amp * np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return out if out.ndim else float(out)


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise DomainError("sample points must have a trailing dimension of 3")
    return x.reshape(-1, 3)


class _ModeProfileTable:
    """Per-side quadrature samples of a mode and its x3-derivatives."""

    def __init__(self, profile, mesh, lam, phi, psi, xi):
        self.weights = {}
        self.deriv = {}
        for side in (-1, +1):
            msk = mesh.element_side == side
            xq = mesh.quad_x[msk].ravel()
            wq = mesh.quad_w[msk].ravel()
            f = mesh.eval_nodal(phi, xq, side=side)
            fp = mesh.eval_nodal(phi, xq, side=side, deriv=1)
            p = mesh.eval_nodal(psi, xq, side=side)
            pp = mesh.eval_nodal(psi, xq, side=side, deriv=1)
            f2, p2 = ode_second_derivatives(
                profile, mesh, phi, psi, xi, lam, -lam**2, xq, side
            )
            rho = profile.density(xq, side=side)
            rho_p = profile.density_prime(xq, side=side)
            self.weights[side] = wq
            self.deriv[side] = {
                "phi": (f, fp, f2), "psi": (p, pp, p2),
                "rho": (rho, rho_p),
            }

    def w_sq_integral(self, j):
        """int over both sides of (d^j phi)^2 + (d^j psi)^2."""
        if j > _MAX_SOBOLEV_ORDER:
            raise DomainError("x3-derivative order %d exceeds the bootstrap depth" % j)
        out = 0.0
        for side in (-1, +1):
            d = self.deriv[side]
            out += float(np.sum(self.weights[side] * (d["phi"][j] ** 2 + d["psi"][j] ** 2)))
        return out

    def q_sq_integral(self, j, r):
        """int of (d^j q-profile)^2 with q-profile = -rho0 (r phi + psi')."""
        if j > 1:
            raise DomainError("q-profile derivatives available up to order 1")
        out = 0.0
        for side in (-1, +1):
            d = self.deriv[side]
            rho, rho_p = d["rho"]
            base = r * d["phi"][0] + d["psi"][1]
            if j == 0:
                q = rho * base
            else:
                q = rho_p * base + rho * (r * d["phi"][1] + d["psi"][2])
            out += float(np.sum(self.weights[side] * q**2))
        return out


def _sobolev_weighted(table, which, k, r, lam, t, coeff):
    """Sum_j (1 + r^2)^{k-j} ||d^j profile||^2 with the field's amplitude."""
    amp = coeff * math.exp(lam * t)
    if which == "v":
        amp *= lam
    total = 0.0
    for j in range(k + 1):
        if which == "q":
            d = table.q_sq_integral(j, r)
        else:
            d = table.w_sq_integral(j)
        total += (1.0 + r**2) ** (k - j) * d
    return amp**2 * total


class PeriodicField:
    """Conjugate pair of maximizing lattice modes: exact normal-mode growth."""

    def __init__(self, profile, mesh, L, lattice=None):
        sigma = profile.geometry.sigma
        if sigma > 0 and L <= math.sqrt(sigma / (profile.geometry.g * profile.rho_jump)):
            raise ConfigurationError(
                "period scale L is inside the stability certificate: "
                "no growing lattice mode exists"
            )
        if lattice is None:
            lattice = lattice_modes(profile, mesh, L)
        if lattice.certificate or lattice.Lambda_L <= 0:
            raise ConfigurationError("lattice carries no growing mode (stability certificate)")
        self.profile, self.mesh, self.L = profile, mesh, L
        self.lattice = lattice
        k = int(np.argmax(lattice.points[:, 3]))
        mag = lattice.points[k, 2]
        cands = lattice.points[np.isclose(lattice.points[:, 2], mag)]
        cands = sorted(map(tuple, cands[:, :2]))
        k1, k2 = cands[-1]  # deterministic representative; its negation is the partner
        self.xi1 = np.array([k1 / L, k2 / L])
        self.Lambda_L = float(lattice.Lambda_L)
        self.mode = lattice.modes[round(float(mag), 12)]
        self.mode3d = extend_to_plane(self.mode, self.xi1)
        self._table = None
        self.last_imag_residual = 0.0

    def _profiles(self, x3):
        mesh = self.mesh
        m3 = self.mode3d
        f = mesh.eval_nodal(m3.phi, x3)
        th = mesh.eval_nodal(m3.theta, x3)
        p = mesh.eval_nodal(m3.psi, x3)
        x3 = np.asarray(x3, dtype=float)
        pp = np.empty_like(x3)
        rho = np.empty_like(x3)
        side = np.where(x3 >= 0, 1, -1)
        for s in (-1, +1):
            msk = side == s
            if np.any(msk):
                pp[msk] = mesh.eval_nodal(m3.psi, x3[msk], side=s, deriv=1)
                rho[msk] = self.profile.density(x3[msk], side=s)
        return f, th, p, pp, rho

    def eta(self, x, t=0.0):
        pts = _as_points(x)
        f, th, p, _, _ = self._profiles(pts[:, 2])
        phase = pts[:, 0] * self.xi1[0] + pts[:, 1] * self.xi1[1]
        amp = math.exp(self.Lambda_L * t)
        out = np.stack(
            [2 * f * np.sin(phase), 2 * th * np.sin(phase), 2 * p * np.cos(phase)], axis=-1
        )
        return amp * out.reshape(np.asarray(x).shape)

    def v(self, x, t=0.0):
        return self.Lambda_L * self.eta(x, t)

    def q(self, x, t=0.0):
        pts = _as_points(x)
        _, _, _, pp, rho = self._profiles(pts[:, 2])
        phi_r = self.mesh.eval_nodal(self.mode.phi, pts[:, 2])
        phase = pts[:, 0] * self.xi1[0] + pts[:, 1] * self.xi1[1]
        amp = math.exp(self.Lambda_L * t)
        vals = -rho * 2 * (self.mode.xi_mag * phi_r + pp) * np.cos(phase)
        return amp * vals.reshape(np.asarray(x).shape[:-1])

    def sample(self, grid, t=0.0):
        """Point samples on a rectilinear grid (x1s, x2s, x3s)."""
        x1s, x2s, x3s = (np.asarray(g, dtype=float) for g in grid)
        X1, X2, X3 = np.meshgrid(x1s, x2s, x3s, indexing="ij")
        pts = np.stack([X1, X2, X3], axis=-1)
        eta = self.eta(pts, t)
        vv = self.v(pts, t)
        qq = self.q(pts, t)
        cols = dict(x1=X1.ravel(), x2=X2.ravel(), x3=X3.ravel())
        for i, name in enumerate(("eta1", "eta2", "eta3")):
            cols[name] = eta[..., i].ravel()
        for i, name in enumerate(("v1", "v2", "v3")):
            cols[name] = vv[..., i].ravel()
        cols["q"] = qq.ravel()
        return cols

    def table(self):
        if self._table is None:
            self._table = _ModeProfileTable(
                self.profile, self.mesh, self.mode.lam,
                self.mode.phi, self.mode.psi, self.mode.xi_mag,
            )
        return self._table

    def sobolev_norm(self, which="eta", k=0, t=0.0):
        """Fourier-side piecewise H^k norm of eta, v, or q at time t.

        The representation is the conjugate pair, each with coefficient
        (2 pi L)^2 w_hat; the Parseval prefactor 1/(4 pi^2 L^2) leaves
        4 pi^2 L^2 * (pair sum).
        """
        if which not in ("eta", "v", "q"):
            raise DomainError("which must be eta, v, or q")
        r = self.mode.xi_mag
        val = _sobolev_weighted(self.table(), which, k, r, self.Lambda_L, t, 1.0)
        return math.sqrt(4 * math.pi**2 * self.L**2 * 2.0 * val)


def synthesize_periodic(profile, mesh, L, lattice=None):
    """Build the periodic growing solution for period scale L."""
    return PeriodicField(profile, mesh, L, lattice=lattice)


class NonperiodicField:
    """Fourier synthesis of growing modes against a radial bump f."""

    def __init__(self, profile, mesh, f, n_radial=16, n_angular=64, curve=None):
        if profile.geometry.sigma > 0 and not (0 < f.a < f.b < profile.xi_c):
            raise ConfigurationError(
                "bump support [%g, %g] must sit inside (0, xi_c = %g)"
                % (f.a, f.b, profile.xi_c)
            )
        if n_angular % 2:
            raise ConfigurationError("n_angular must be even (conjugate pairing)")
        self.profile, self.mesh, self.f = profile, mesh, f
        self.n_angular = n_angular
        tq, wq = np.polynomial.legendre.leggauss(n_radial)
        self.r = 0.5 * (f.a + f.b) + 0.5 * (f.b - f.a) * tq
        self.w = 0.5 * (f.b - f.a) * wq
        self.modes = []
        lams = []
        for rk in self.r:
            m = growth_rate(profile, mesh, float(rk))
            if isinstance(m, Stable):
                raise ConfigurationError(
                    "no growing mode at |xi| = %g inside the bump support" % rk
                )
            self.modes.append(m)
            lams.append(m.lam)
        self.lam = np.array(lams)
        self.lambda0 = float(self.lam.min())
        self.Lambda = float(self.lam.max())
        if curve is not None:
            self.Lambda = max(self.Lambda, float(curve.Lambda))
        self._tables = None
        self.last_imag_residual = 0.0

    # -- field evaluation -------------------------------------------------

    def _mode_heights(self, x3):
        """phi, psi, psi' values of every radial mode at heights x3."""
        x3 = np.asarray(x3, dtype=float)
        side = np.where(x3 >= 0, 1, -1)
        out = []
        for m in self.modes:
            ph = self.mesh.eval_nodal(m.phi, x3)
            ps = self.mesh.eval_nodal(m.psi, x3)
            psp = np.empty_like(x3)
            for s in (-1, +1):
                msk = side == s
                if np.any(msk):
                    psp[msk] = self.mesh.eval_nodal(m.psi, x3[msk], side=s, deriv=1)
            out.append((ph, ps, psp))
        return out

    def _rho_at(self, x3):
        side = np.where(np.asarray(x3) >= 0, 1, -1)
        rho = np.empty_like(np.asarray(x3, dtype=float))
        for s in (-1, +1):
            msk = side == s
            if np.any(msk):
                rho[msk] = self.profile.density(np.asarray(x3)[msk], side=s)
        return rho

    def _evaluate(self, x, t, angular):
        pts = _as_points(x)
        heights = self._mode_heights(pts[:, 2])
        rho = self._rho_at(pts[:, 2])
        npts = pts.shape[0]
        eta = np.zeros((npts, 3), dtype=complex)
        vel = np.zeros((npts, 3), dtype=complex)
        qf = np.zeros(npts, dtype=complex)

        if angular == "bessel":
            s = np.hypot(pts[:, 0], pts[:, 1])
            with np.errstate(invalid="ignore", divide="ignore"):
                cb = np.where(s > 0, pts[:, 0] / np.where(s > 0, s, 1.0), 1.0)
                sb = np.where(s > 0, pts[:, 1] / np.where(s > 0, s, 1.0), 0.0)
            for k, (rk, wk) in enumerate(zip(self.r, self.w)):
                ph, ps, psp = heights[k]
                ck = wk * rk * float(self.f(rk)) * np.exp(self.lam[k] * t) / (2 * math.pi)
                J0, J1 = j0(rk * s), j1(rk * s)
                e1 = ck * ph * J1
                e3 = ck * ps * J0
                eta[:, 0] += e1 * cb
                eta[:, 1] += e1 * sb
                eta[:, 2] += e3
                vel[:, 0] += self.lam[k] * e1 * cb
                vel[:, 1] += self.lam[k] * e1 * sb
                vel[:, 2] += self.lam[k] * e3
                qf += -ck * rho * (rk * ph + psp) * J0
        else:
            alphas = 2 * math.pi * np.arange(self.n_angular) / self.n_angular
            dalpha = 2 * math.pi / self.n_angular
            ca, sa = np.cos(alphas), np.sin(alphas)
            for k, (rk, wk) in enumerate(zip(self.r, self.w)):
                ph, ps, psp = heights[k]
                ck = wk * rk * float(self.f(rk)) * np.exp(self.lam[k] * t) / (4 * math.pi**2) * dalpha
                phase = np.exp(1j * rk * (pts[:, 0, None] * ca + pts[:, 1, None] * sa))
                sum_c = phase @ ca
                sum_s = phase @ sa
                sum_1 = phase.sum(axis=1)
                eta[:, 0] += ck * (-1j) * ph * sum_c
                eta[:, 1] += ck * (-1j) * ph * sum_s
                eta[:, 2] += ck * ps * sum_1
                vel[:, 0] += self.lam[k] * ck * (-1j) * ph * sum_c
                vel[:, 1] += self.lam[k] * ck * (-1j) * ph * sum_s
                vel[:, 2] += self.lam[k] * ck * ps * sum_1
                qf += -ck * rho * (rk * ph + psp) * sum_1

        mag = max(np.abs(eta).max(), np.abs(vel).max(), np.abs(qf).max(), 1e-300)
        self.last_imag_residual = float(
            max(np.abs(eta.imag).max(), np.abs(vel.imag).max(), np.abs(qf.imag).max()) / mag
        )
        shape = np.asarray(x).shape
        return (
            eta.real.reshape(shape),
            vel.real.reshape(shape),
            qf.real.reshape(shape[:-1]),
        )

    def eta(self, x, t=0.0, angular="quadrature"):
        return self._evaluate(x, t, angular)[0]

    def v(self, x, t=0.0, angular="quadrature"):
        return self._evaluate(x, t, angular)[1]

    def q(self, x, t=0.0, angular="quadrature"):
        return self._evaluate(x, t, angular)[2]

    def sample(self, grid, t=0.0, angular="quadrature"):
        x1s, x2s, x3s = (np.asarray(g, dtype=float) for g in grid)
        X1, X2, X3 = np.meshgrid(x1s, x2s, x3s, indexing="ij")
        pts = np.stack([X1, X2, X3], axis=-1)
        eta, vel, qf = self._evaluate(pts, t, angular)
        cols = dict(x1=X1.ravel(), x2=X2.ravel(), x3=X3.ravel())
        for i, name in enumerate(("eta1", "eta2", "eta3")):
            cols[name] = eta[..., i].ravel()
        for i, name in enumerate(("v1", "v2", "v3")):
            cols[name] = vel[..., i].ravel()
        cols["q"] = qf.ravel()
        return cols

    # -- spectral-side norms -----------------------------------------------

    def tables(self):
        if self._tables is None:
            self._tables = [
                _ModeProfileTable(self.profile, self.mesh, m.lam, m.phi, m.psi, m.xi_mag)
                for m in self.modes
            ]
        return self._tables

    def sobolev_norm(self, which="eta", k=0, t=0.0):
        """Radial-quadrature piecewise H^k norm of eta, v, or q at time t."""
        if which not in ("eta", "v", "q"):
            raise DomainError("which must be eta, v, or q")
        total = 0.0
        for rk, wk, lam, table in zip(self.r, self.w, self.lam, self.tables()):
            fr = float(self.f(rk))
            total += wk * rk * _sobolev_weighted(table, which, k, rk, lam, t, fr) / (2 * math.pi)
        return math.sqrt(total)

    def interface_displacement_l2(self, patch_radius=None, n=48):
        """L2 norm of eta_3(., 0, 0) over a horizontal patch (reality check
        that vertical interface displacement is genuinely excited)."""
        if patch_radius is None:
            patch_radius = 2 * math.pi / self.f.a
        xs = np.linspace(-patch_radius, patch_radius, n)
        X1, X2 = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([X1, X2, np.zeros_like(X1)], axis=-1)
        vals = self.eta(pts, 0.0, angular="bessel")[..., 2]
        area = (xs[1] - xs[0]) ** 2
        return math.sqrt(float(np.sum(vals**2) * area))


def synthesize_nonperiodic(profile, mesh, f, n_radial=16, n_angular=64, curve=None):
    """Build the Fourier-synthesized growing solution for bump f."""
    return NonperiodicField(profile, mesh, f, n_radial, n_angular, curve)
