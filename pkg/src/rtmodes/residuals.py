"""Strong-form and interface-jump diagnostics for computed eigenpairs.

The variational solver works in the weak form; these routines measure how
well a discrete pair (phi, psi) satisfies the per-frequency ODE system and
its natural jump conditions, which the weak form only enforces in the limit.
Residuals are sampled at element midpoints, where second derivatives of
quadratic elements carry their best accuracy; order-1 meshes have no
meaningful pointwise second derivative, so order >= 2 is required.
"""

import numpy as np

from .errors import DomainError

_FLOOR = 1e-300


def coefficient_fields(profile, x, side, s):
    """Modified-viscosity coefficient bundle at points x on one side."""
    rho = profile.density(x, side=side)
    pr = profile.pprime_rho(x, side=side)
    pr_p = profile.pprime_rho_prime(x, side=side)
    eps = s * profile.eps0(x, side=side)
    eps_p = s * profile.eps0_prime(x, side=side)
    dlt = s * profile.delta0(x, side=side)
    dlt_p = s * profile.delta0_prime(x, side=side)
    return rho, pr, pr_p, eps, eps_p, dlt, dlt_p


def ode_second_derivatives(profile, mesh, phi, psi, xi, s, mu, x, side):
    """(phi'', psi'') at points x from the strong-form ODEs.

    Uses the nodal fields' values and first derivatives plus the analytic
    coefficient derivatives; this is the bootstrap route, independent of the
    elementwise second derivative of the interpolant.
    """
    if s <= 0:
        raise DomainError("derivative bootstrap needs a positive family parameter")
    g = profile.geometry.g
    rho, pr, pr_p, eps, eps_p, dlt, dlt_p = coefficient_fields(profile, x, side, s)
    f = mesh.eval_nodal(phi, x, side=side)
    fp = mesh.eval_nodal(phi, x, side=side, deriv=1)
    p = mesh.eval_nodal(psi, x, side=side)
    pp = mesh.eval_nodal(psi, x, side=side, deriv=1)

    big = 4 * eps / 3 + dlt + pr
    big_p = 4 * eps_p / 3 + dlt_p + pr_p
    mid = dlt + eps / 3 + pr
    mid_p = dlt_p + eps_p / 3 + pr_p

    d_eps_phi = -mu * rho * f + xi**2 * big * f + xi * (mid * pp + (eps_p - g * rho) * p)
    phi2 = (d_eps_phi - eps_p * fp) / eps
    d_big_psi = -mu * rho * p + eps * xi**2 * p - xi * (mid_p * f + mid * fp + (g * rho - eps_p) * f)
    psi2 = (d_big_psi - big_p * pp) / big
    return phi2, psi2


def strong_form_residual(profile, mesh, phi, psi, xi, s, mu):
    """Relative strong-form defect of the coupled ODE pair.

    Samples element midpoints per side; the defect is the RMS of both
    equations' imbalance over the RMS size of their individual terms.
    """
    if mesh.order < 2:
        raise DomainError("strong-form residual needs order >= 2 elements")
    if s <= 0:
        raise DomainError("strong-form residual needs a positive family parameter")
    g = profile.geometry.g
    num = 0.0
    den = 0.0
    count = 0
    for side in (-1, +1):
        msk = mesh.element_side == side
        xs = 0.5 * (mesh.element_breaks[:-1] + mesh.element_breaks[1:])[msk]
        rho, pr, pr_p, eps, eps_p, dlt, dlt_p = coefficient_fields(profile, xs, side, s)
        f = mesh.eval_nodal(phi, xs, side=side)
        fp = mesh.eval_nodal(phi, xs, side=side, deriv=1)
        f2 = mesh.eval_nodal(phi, xs, side=side, deriv=2)
        p = mesh.eval_nodal(psi, xs, side=side)
        pp = mesh.eval_nodal(psi, xs, side=side, deriv=1)
        p2 = mesh.eval_nodal(psi, xs, side=side, deriv=2)

        big = 4 * eps / 3 + dlt + pr
        big_p = 4 * eps_p / 3 + dlt_p + pr_p
        mid = dlt + eps / 3 + pr
        mid_p = dlt_p + eps_p / 3 + pr_p

        t_phi = [
            -(eps_p * fp + eps * f2),
            xi**2 * big * f,
            xi * (mid * pp + (eps_p - g * rho) * p),
            -mu * rho * f,
        ]
        t_psi = [
            -(big_p * pp + big * p2),
            eps * xi**2 * p,
            -xi * (mid_p * f + mid * fp + (g * rho - eps_p) * f),
            -mu * rho * p,
        ]
        r_phi = sum(t_phi)
        r_psi = sum(t_psi)
        num += float(np.sum(r_phi**2 + r_psi**2))
        den += float(np.sum(sum(np.abs(t) for t in t_phi) ** 2 + sum(np.abs(t) for t in t_psi) ** 2))
        count += xs.size
    return np.sqrt(num / count) / max(np.sqrt(den / count), _FLOOR)


def jump_residuals(profile, mesh, phi, psi, xi, s):
    """Normalized defects of the four interface conditions at x3 = 0.

    Order: [[phi]], [[psi]], [[eps (phi' - xi psi)]], and the normal-stress
    balance against the surface-tension term.  The first two vanish
    structurally (shared interface node).
    """
    sigma = profile.geometry.sigma
    vals = {}
    for side in (-1, +1):
        rho, pr, pr_p, eps, eps_p, dlt, dlt_p = coefficient_fields(
            profile, np.array([0.0]), side, s
        )
        vals[side] = dict(
            pr=pr[0], eps=eps[0], dlt=dlt[0],
            f=mesh.eval_nodal(phi, [0.0], side=side)[0],
            fp=mesh.eval_nodal(phi, [0.0], side=side, deriv=1)[0],
            p=mesh.eval_nodal(psi, [0.0], side=side)[0],
            pp=mesh.eval_nodal(psi, [0.0], side=side, deriv=1)[0],
        )
    lo, hi = vals[-1], vals[+1]

    def rel(jump_terms):
        total = sum(jump_terms)
        scale = sum(abs(t) for t in jump_terms)
        return abs(total) / max(scale, _FLOOR)

    j1 = rel([hi["f"], -lo["f"]])
    j2 = rel([hi["p"], -lo["p"]])
    j3 = rel([hi["eps"] * (hi["fp"] - xi * hi["p"]), -lo["eps"] * (lo["fp"] - xi * lo["p"])])
    stress = lambda v: (v["dlt"] + v["eps"] / 3 + v["pr"]) * (v["pp"] + xi * v["f"]) + v["eps"] * (
        v["pp"] - xi * v["f"]
    )
    j4 = rel([stress(hi), -stress(lo), -sigma * xi**2 * hi["p"]])
    return np.array([j1, j2, j3, j4])
