"""Smallest eigenpair of the symmetric-definite pencil (E0 + s E1, J).

mu(s) is the constrained minimum of the modified energy over the J = 1
sphere, realized as the bottom generalized eigenvalue.  Desk-scale problems
(n <= dense cutoff) go through LAPACK; larger ones use ARPACK shift-invert
with a shift strictly below the spectrum, which the exact discrete bound
mu >= -g xi supplies for free.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import DomainError, SolverError

DENSE_CUTOFF = 900
_MAX_POLISH = 4


@dataclass
class EigenResult:
    """Bottom eigenpair: mu, J-normalized minimizer, and the pencil residual."""

    mu: float
    minimizer: np.ndarray
    residual: float
    s: float


def _normalize(forms, x):
    x = x / np.sqrt(float(x @ (forms.J @ x)))
    anchor = x[forms.psi0_dof]
    if anchor == 0.0:
        nz = np.flatnonzero(x)
        anchor = x[nz[0]] if nz.size else 1.0
    return x if anchor > 0 else -x


def _residual(forms, A, mu, x):
    return float(np.linalg.norm(A @ x - mu * (forms.J @ x)) / np.linalg.norm(x))


def _polish(forms, A, mu, x, target):
    """Inverse-iteration refinement toward the bottom eigenpair."""
    for _ in range(_MAX_POLISH):
        res = _residual(forms, A, mu, x)
        if res <= target:
            break
        shift = mu - max(1e-8 * abs(mu), 1e-12 * (forms.norms()[0] + 1.0))
        try:
            lu = spla.splu((A - shift * forms.J).tocsc())
        except RuntimeError:
            break
        y = lu.solve(forms.J @ x)
        x = _normalize(forms, y)
        mu = float(x @ (A @ x))
    return mu, x


def smallest_eig(forms, s, v0=None, sigma=None, dense_cutoff=DENSE_CUTOFF):
    """Minimum of x^T (E0 + s E1) x over the J-unit sphere, with minimizer.

    Parameters
    ----------
    forms : FormSet
    s : float
        Family parameter (>= 0).
    v0 : ndarray, optional
        Start vector for the iterative path (warm starts speed up parameter
        sweeps; has no effect on the dense path).
    sigma : float, optional
        Shift for shift-invert; must lie strictly below the spectrum.  The
        default uses the variational bound mu >= -g xi.
    """
    if s < 0:
        raise DomainError("family parameter s must be >= 0")
    A = (forms.E0 + s * forms.E1).tocsr()
    n = forms.n
    target = 1e-9 * (forms.norms()[0] + s * forms.norms()[1])

    if n <= dense_cutoff:
        E0d, E1d, Jd = forms.dense()
        vals, vecs = sla.eigh(E0d + s * E1d, Jd, subset_by_index=[0, 0])
        mu = float(vals[0])
        x = _normalize(forms, vecs[:, 0])
        return EigenResult(mu, x, _residual(forms, A, mu, x), s)

    if sigma is None:
        lower = -forms.g * forms.xi
        sigma = lower - max(1e-8, 1e-6 * abs(lower)) - 1e-9
    if v0 is None:
        v0 = np.ones(n)
    try:
        vals, vecs = spla.eigsh(
            A, k=1, M=forms.J, sigma=sigma, which="LM",
            v0=v0, tol=0, ncv=min(n, 48), maxiter=max(500, 10 * n),
        )
        mu = float(vals[0])
        x = _normalize(forms, vecs[:, 0])
    except spla.ArpackError as exc:
        E0d, E1d, Jd = forms.dense()
        try:
            vals, vecs = sla.eigh(E0d + s * E1d, Jd, subset_by_index=[0, 0])
        except sla.LinAlgError:
            raise SolverError(
                "eigensolver failed to converge",
                {"s": s, "sigma": sigma, "arpack": str(exc)},
            ) from exc
        mu = float(vals[0])
        x = _normalize(forms, vecs[:, 0])

    mu, x = _polish(forms, A, mu, x, target)
    res = _residual(forms, A, mu, x)
    if res > 10 * target:
        raise SolverError(
            "eigenpair residual %.3e exceeds tolerance %.3e" % (res, target),
            {"s": s, "mu": mu},
        )
    return EigenResult(mu, x, res, s)


def dense_spectrum(forms, s):
    """All generalized eigenvalues of (E0 + s E1, J); oracle for tests."""
    E0d, E1d, Jd = forms.dense()
    return sla.eigh(E0d + s * E1d, Jd, eigvals_only=True)


def c2_diagnostic(forms, dense_cutoff=DENSE_CUTOFF):
    """Discrete inf of the viscous form over the constraint set.

    The bottom eigenvalue of (E1, J): a computable stand-in for the slope
    constant in mu(s) >= -g xi + s C2.  Positive whenever eps0 > 0.
    """
    n = forms.n
    if n <= dense_cutoff:
        _, E1d, Jd = forms.dense()
        vals = sla.eigh(E1d, Jd, subset_by_index=[0, 0], eigvals_only=True)
        return float(vals[0])
    v = np.ones(n)
    scale = float(v @ (forms.E1 @ v)) / float(v @ (forms.J @ v))
    vals, _ = spla.eigsh(
        forms.E1.tocsr(), k=1, M=forms.J, sigma=-0.01 * scale - 1e-12,
        which="LM", v0=v, tol=0, ncv=min(n, 48),
    )
    return float(vals[0])
