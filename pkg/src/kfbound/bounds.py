"""Eigenvalue-analysis lower bounds and the achievable covariance envelope.

Everything here is closed form given an eigendecomposition: the scalar floor
on the smallest eigenvalue of the steady-state covariance, its matrix
refinements, the capped-precision certificate that defines the LMI feasible
set for the noise design, and the envelope bracketing every achievable
steady state between the R = 0 and R -> infinity limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleError, NumericalError
from .linalg import as_matrix, is_symmetric, singular_values, spectral_radius, sym_eig, sym_part
from .model import LinearSystem
from .riccati import SolverOptions, UnifiedRiccatiParams, solve_dare_zero_r, solve_stein

__all__ = [
    "quad_root",
    "CovarianceFloor",
    "covariance_floor",
    "capped_eig_floor",
    "DesignCertificate",
    "design_certificate",
    "CovarianceEnvelope",
    "envelope",
    "prescribe_bound",
]

_COND_LIMIT = 1e12


def quad_root(a: float, b: float, c: float) -> float:
    """Nonnegative root of (b/2) x^2 + a x - c/2 = 0, i.e. (-a + sqrt(a^2 + b c)) / b.

    Requires b > 0 and c >= 0. Uses the conjugate form when a > 0 to avoid
    cancellation.
    """
    if not b > 0.0:
        raise ValueError("b must be positive")
    if c < 0.0:
        raise ValueError("c must be nonnegative")
    s = math.sqrt(a * a + b * c)
    if a > 0.0:
        return c / (a + s)
    return (s - a) / b


def _inv_pd(M: np.ndarray, what: str) -> np.ndarray:
    """Inverse of a symmetric PD matrix with an explicit conditioning gate."""
    dec = sym_eig(sym_part(M))
    w = dec.eigenvalues
    if w[-1] <= 0.0:
        raise NumericalError(f"{what} is singular or indefinite; cannot invert")
    if w[0] / w[-1] > _COND_LIMIT:
        raise NumericalError(
            f"{what} is too ill conditioned to invert (condition estimate {w[0] / w[-1]:.3e})"
        )
    return sym_part((dec.eigenvectors / w) @ dec.eigenvectors.T)


@dataclass(frozen=True, eq=False)
class CovarianceFloor:
    """Lower bounds on the positive solution of the unified Riccati equation.

    ``eig_floor`` bounds the smallest eigenvalue of the solution from below;
    ``coarse`` is the matrix floor built from it and ``refined`` the floor
    after one fixed-point resubstitution. No ordering between ``coarse`` and
    ``refined`` is claimed; both dominate delta * Q.
    """

    eig_floor: float
    coarse: np.ndarray
    refined: np.ndarray


def covariance_floor(params: UnifiedRiccatiParams) -> CovarianceFloor:
    """Matrix lower bounds for the unified-equation solution at the given R."""
    A, G, Q, R, delta = params.A, params.G, params.Q, params.R, params.delta
    n = A.shape[0]

    s1g = float(singular_values(G)[0])
    if s1g == 0.0:
        raise ValueError("G must be nonzero for the eigenvalue floor")
    lam_max_r_inv = 1.0 / float(np.linalg.eigvalsh(sym_part(R))[0])
    lam_min_q = max(float(np.linalg.eigvalsh(sym_part(Q))[0]), 0.0)
    lam_min_drift = float(np.linalg.eigvalsh(sym_part(A + A.T + delta * (A.T @ A)))[0])

    b = 2.0 * lam_max_r_inv * s1g**2
    c = 2.0 * lam_min_q
    a = -(lam_min_drift + delta * lam_min_q * lam_max_r_inv * s1g**2)
    phi = quad_root(a, b, c)
    if phi <= 0.0:
        raise InfeasibleError(
            "eigenvalue floor is nonpositive (process noise has a null direction "
            "and the drift term is nonnegative)"
        )

    eye = np.eye(n)
    F = delta * A + eye
    noise_term = delta * (G @ _inv_pd(R, "R") @ G.T)
    coarse = sym_part(F.T @ _inv_pd(eye / phi + noise_term, "the floor kernel") @ F + delta * Q)
    refined = sym_part(F.T @ _inv_pd(_inv_pd(coarse, "the coarse floor") + noise_term, "the refined kernel") @ F + delta * Q)
    return CovarianceFloor(eig_floor=phi, coarse=coarse, refined=refined)


def capped_eig_floor(system: LinearSystem, precision_cap: float) -> float:
    """Scalar floor on the smallest eigenvalue of the steady state, assuming
    every eigenvalue of R^-1 stays at or below ``precision_cap``.

    This is the filter-substituted variant of the floor in
    :func:`covariance_floor` and is never larger than it whenever the cap
    actually holds.
    """
    if not precision_cap > 0.0:
        raise ValueError("precision_cap must be positive")
    W = system.noise_covariance()
    s1c = float(singular_values(system.C)[0])
    if s1c == 0.0:
        raise InfeasibleError("measurement matrix is zero; there is no noise to design")
    lam_min_w = max(float(np.linalg.eigvalsh(W)[0]), 0.0)
    base = float(np.linalg.eigvalsh(sym_part(system.A @ system.A.T) - np.eye(system.n_x))[0])

    phi = quad_root(
        -(base + lam_min_w * precision_cap * s1c**2),
        2.0 * precision_cap * s1c**2,
        2.0 * lam_min_w,
    )
    if phi <= 0.0:
        raise InfeasibleError(
            "capped eigenvalue floor is nonpositive; the certificate cannot be built"
        )
    return phi


@dataclass(frozen=True, eq=False)
class DesignCertificate:
    """Derived quantities defining the LMI feasible set of noise covariances.

    A noise covariance R with eigenvalues of R^-1 capped by ``precision_cap``
    keeps the steady-state prior covariance above ``target`` whenever
    C^T R^-1 C <= lmi_bound, which by Schur complement is the linear matrix
    inequality [[lmi_bound, C^T], [C, R]] >= 0.
    """

    eig_floor: float
    cov_floor: np.ndarray
    lmi_bound: np.ndarray
    precision_cap: float
    target: np.ndarray


def design_certificate(system: LinearSystem, target, precision_cap: float) -> DesignCertificate:
    """Build the LMI certificate for a prescribed covariance floor.

    Requires an invertible A and target - B Q B^T positive definite (the
    certificate contains its inverse); violations are reported as infeasible
    rather than numerical failures.
    """
    if not precision_cap > 0.0:
        raise ValueError("precision_cap must be positive")
    target = as_matrix(target, "target")
    n = system.n_x
    if target.shape != (n, n) or not is_symmetric(target):
        raise ValueError(f"target must be a symmetric {n}x{n} matrix")

    sv = singular_values(system.A)
    if sv[0] == 0.0 or sv[-1] <= 1e-10 * sv[0]:
        raise InfeasibleError("state matrix A is singular; the feasible-set construction needs A^-1")

    W = system.noise_covariance()
    D = sym_part(target - W)
    if float(np.linalg.eigvalsh(D)[0]) <= 1e-10:
        raise InfeasibleError(
            "prescribed covariance floor does not exceed the process-noise "
            "contribution (target - B Q B^T must be positive definite)"
        )

    phi = capped_eig_floor(system, precision_cap)
    A, C = system.A, system.C
    kernel = _inv_pd(np.eye(n) / phi + precision_cap * (C.T @ C), "the certificate kernel")
    cov_floor = sym_part(A @ kernel @ A.T + W)
    lmi_bound = sym_part(A.T @ _inv_pd(D, "target - B Q B^T") @ A - _inv_pd(cov_floor, "the covariance floor"))
    return DesignCertificate(
        eig_floor=phi,
        cov_floor=cov_floor,
        lmi_bound=lmi_bound,
        precision_cap=float(precision_cap),
        target=target,
    )


@dataclass(frozen=True, eq=False)
class CovarianceEnvelope:
    """Achievable steady-state covariances lie between ``lower`` and ``upper``."""

    lower: np.ndarray
    upper: np.ndarray


def envelope(system: LinearSystem, opts: Optional[SolverOptions] = None) -> CovarianceEnvelope:
    """Bracket of achievable steady states: R = 0 floor and R -> infinity cap.

    The upper end solves the Stein equation P = A P A^T + B Q B^T and exists
    only for stable A.
    """
    rho = spectral_radius(system.A)
    if rho >= 1.0:
        raise ValueError(
            f"A must be stable for the R -> infinity covariance (spectral radius {rho:.6g})"
        )
    lower = solve_dare_zero_r(system, opts).P
    upper = solve_stein(system.A, system.noise_covariance(), opts)
    if float(np.linalg.eigvalsh(sym_part(upper - lower))[0]) < -1e-8:
        raise NumericalError("envelope ordering violated: upper bound fell below the floor")
    return CovarianceEnvelope(lower=lower, upper=upper)


def prescribe_bound(env: CovarianceEnvelope, alpha: float) -> np.ndarray:
    """Convex combination alpha * upper + (1 - alpha) * lower, alpha in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return sym_part(alpha * env.upper + (1.0 - alpha) * env.lower)
