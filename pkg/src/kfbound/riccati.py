"""Steady-state matrix equation solvers.

Covers the discrete algebraic Riccati equation (fixed-point covariance
iteration), its R = 0 limit, the discrete Lyapunov/Stein equation (Smith
squaring), the residual of the unified Riccati equation with an explicit
noise weight, and the steady-state Kalman gain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import NumericalError
from .linalg import as_matrix, chol_psd, is_pd, is_symmetric, pinv_sym, spectral_radius, sym_part
from .model import LinearSystem

__all__ = [
    "SolverOptions",
    "RiccatiSolution",
    "UnifiedRiccatiParams",
    "solve_dare",
    "solve_dare_zero_r",
    "solve_stein",
    "kalman_gain",
    "params_from_filter",
    "unified_residual",
]

_RESIDUAL_RTOL = 1e-9
_PSD_TOL = 1e-10
_ZERO_R_PINV_RTOL = 1e-10
_ZERO_R_AGREEMENT_RTOL = 1e-4
_ZERO_R_EPSILONS = (1e-6, 1e-8)


@dataclass(frozen=True)
class SolverOptions:
    """Shared stopping controls for the fixed-point solvers."""

    rel_tol: float = 1e-12
    max_iters: int = 200_000
    divergence_cap: float = 1e12

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Converged steady-state prior covariance with its equation residual."""

    P: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True, eq=False)
class UnifiedRiccatiParams:
    """Parameters of the unified Riccati equation with explicit weight R.

    ``G`` plays the role of the equation's input matrix (it is the
    measurement matrix transposed under the filter substitution, not the
    plant's B). ``delta`` is the sampling period; delta = 0 gives the
    continuous-time equation and delta = 1 the discrete-time one.
    """

    A: np.ndarray
    G: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    delta: float

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        G = as_matrix(self.G, "G")
        Q = as_matrix(self.Q, "Q")
        R = as_matrix(self.R, "R")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {A.shape}")
        if G.shape[0] != n:
            raise ValueError(f"G must have {n} rows, got shape {G.shape}")
        m = G.shape[1]
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got shape {Q.shape}")
        if R.shape != (m, m):
            raise ValueError(f"R must be {m}x{m} to match G, got shape {R.shape}")
        if not is_symmetric(Q) or not chol_psd(Q, shift_tol=1e-10).ok:
            raise ValueError("Q must be symmetric positive semidefinite")
        if not is_pd(R):
            raise ValueError("R must be symmetric positive definite")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)


def _dare_step(A, C, W, P, innovation_apply):
    CP = C @ P
    S = sym_part(CP @ C.T)
    X = innovation_apply(S, CP)
    return sym_part(A @ (P - CP.T @ X) @ A.T + W)


def _iterate(A, C, W, innovation_apply, opts: SolverOptions) -> Tuple[np.ndarray, int]:
    P = W.copy()
    norm_p = float(np.linalg.norm(P))
    for k in range(1, opts.max_iters + 1):
        Pn = _dare_step(A, C, W, P, innovation_apply)
        norm_pn = float(np.linalg.norm(Pn))
        if norm_pn > opts.divergence_cap:
            raise NumericalError(
                "covariance iteration diverged; an unstable mode appears undetectable"
            )
        if float(np.linalg.norm(Pn - P)) <= opts.rel_tol * max(1.0, norm_p):
            return Pn, k
        P, norm_p = Pn, norm_pn
    raise NumericalError(
        f"covariance iteration did not converge within {opts.max_iters} steps "
        "(marginal detectability)"
    )


def _as_solution(A, C, W, P, iterations, innovation_apply) -> RiccatiSolution:
    residual = float(np.linalg.norm(_dare_step(A, C, W, P, innovation_apply) - P))
    norm_p = float(np.linalg.norm(P))
    if residual > _RESIDUAL_RTOL * max(1.0, norm_p):
        raise NumericalError(
            f"steady-state covariance residual {residual:.3e} exceeds its contract"
        )
    if np.linalg.eigvalsh(P)[0] < -_PSD_TOL:
        raise NumericalError("steady-state covariance is not positive semidefinite")
    return RiccatiSolution(P=P, iterations=iterations, residual=residual)


def solve_dare(system: LinearSystem, R, opts: Optional[SolverOptions] = None) -> RiccatiSolution:
    """Steady-state prior covariance for measurement-noise covariance R.

    Runs the covariance fixed-point iteration

        P <- A (P - P C^T (C P C^T + R)^-1 C P) A^T + B Q B^T

    from P = B Q B^T until the relative update drops below ``rel_tol``.
    Divergence past ``divergence_cap`` signals an undetectable unstable mode;
    exhausting ``max_iters`` signals marginal detectability.
    """
    opts = opts or SolverOptions()
    R = as_matrix(R, "R")
    if R.shape != (system.n_y, system.n_y):
        raise ValueError(f"R must be {system.n_y}x{system.n_y}, got shape {R.shape}")
    if not is_pd(R):
        raise ValueError("R must be symmetric positive definite")

    def innovation_apply(S, CP):
        try:
            return np.linalg.solve(S + R, CP)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular innovation covariance") from exc

    A, C, W = system.A, system.C, system.noise_covariance()
    P, k = _iterate(A, C, W, innovation_apply, opts)
    return _as_solution(A, C, W, P, k, innovation_apply)


def solve_dare_zero_r(system: LinearSystem, opts: Optional[SolverOptions] = None) -> RiccatiSolution:
    """R = 0 limit of the steady-state covariance (the achievable floor).

    The innovation inverse is replaced by a pseudo-inverse. The result is
    cross-checked against the regularized limit R = eps * I for
    eps in {1e-6, 1e-8}; disagreement beyond 1e-4 relative is reported as a
    numerical failure rather than returned silently.
    """
    opts = opts or SolverOptions()

    def innovation_apply(S, CP):
        return pinv_sym(S, rank_tol=_ZERO_R_PINV_RTOL) @ CP

    A, C, W = system.A, system.C, system.noise_covariance()
    P, k = _iterate(A, C, W, innovation_apply, opts)
    solution = _as_solution(A, C, W, P, k, innovation_apply)

    eye = np.eye(system.n_y)
    for eps in _ZERO_R_EPSILONS:
        reference = solve_dare(system, eps * eye, opts).P
        gap = float(np.linalg.norm(solution.P - reference))
        if gap > _ZERO_R_AGREEMENT_RTOL * max(1.0, float(np.linalg.norm(solution.P))):
            raise NumericalError(
                f"R=0 pseudo-inverse path disagrees with the eps={eps:g} regularized "
                f"limit (gap {gap:.3e})"
            )
    return solution


def solve_stein(A, W, opts: Optional[SolverOptions] = None) -> np.ndarray:
    """Solve P = A P A^T + W by Smith squaring; requires a stable A.

    Convergence is quadratic in the doubling index since the tail after m
    doublings is A^(2^m) P A^(2^m)^T.
    """
    opts = opts or SolverOptions()
    A = as_matrix(A, "A")
    W = as_matrix(W, "W")
    if A.shape[0] != A.shape[1] or W.shape != A.shape:
        raise ValueError("A and W must be square matrices of the same size")
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise ValueError(f"A must be stable for the Stein equation (spectral radius {rho:.6g})")

    P = sym_part(W)
    Ak = A.copy()
    for _ in range(100):
        na = float(np.linalg.norm(Ak))
        if na * na * float(np.linalg.norm(P)) <= opts.rel_tol * max(1.0, float(np.linalg.norm(P))):
            break
        P = sym_part(P + Ak @ P @ Ak.T)
        Ak = Ak @ Ak
    else:  # pragma: no cover - 100 doublings cover any rho < 1 in double precision
        raise NumericalError("Smith iteration did not converge")

    residual = float(np.linalg.norm(P - A @ P @ A.T - W))
    if residual > 1e-10 * max(1.0, float(np.linalg.norm(P))):
        raise NumericalError(f"Stein residual {residual:.3e} exceeds its contract")
    return P


def kalman_gain(system: LinearSystem, P, R) -> np.ndarray:
    """Steady-state gain K = P C^T (C P C^T + R)^-1 for symmetric P."""
    P = as_matrix(P, "P")
    R = as_matrix(R, "R")
    C = system.C
    S = sym_part(C @ P @ C.T + R)
    try:
        return np.linalg.solve(S, C @ P).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular innovation covariance") from exc


def params_from_filter(system: LinearSystem, R) -> UnifiedRiccatiParams:
    """Unified-equation parameters whose delta = 1 equation is the filter DARE.

    The substitution is delta = 1, A -> A^T - I, G -> C^T and Q -> B Q B^T.
    The identity lambda_i(A_u + A_u^T + A_u^T A_u) = lambda_i(A A^T - I) that
    links the two scalar-floor formulas is asserted on every conversion.
    """
    A_u = system.A.T - np.eye(system.n_x)
    params = UnifiedRiccatiParams(
        A=A_u,
        G=system.C.T,
        Q=system.noise_covariance(),
        R=R,
        delta=1.0,
    )
    lhs = np.linalg.eigvalsh(sym_part(A_u + A_u.T + A_u.T @ A_u))
    rhs = np.linalg.eigvalsh(sym_part(system.A @ system.A.T) - np.eye(system.n_x))
    scale = max(1.0, float(np.max(np.abs(rhs))))
    if float(np.max(np.abs(lhs - rhs))) > 1e-8 * scale:
        raise NumericalError("filter substitution identity check failed")
    return params


def unified_residual(params: UnifiedRiccatiParams, P) -> float:
    """Frobenius norm of the unified Riccati equation's left-hand side at P.

    The evaluated form is

        P A + A^T P + delta A^T P A
        - (delta A^T + I) P G (R + delta G^T P G)^-1 G^T P (delta A + I) + Q

    which reduces to the continuous-time residual at delta = 0 and, after the
    filter substitution, to the DARE residual at delta = 1. For delta > 0 the
    algebraically equivalent matrix-inversion-lemma form is evaluated as well
    and the two must agree; disagreement is a numerical failure.
    """
    P = as_matrix(P, "P")
    n = params.A.shape[0]
    if P.shape != (n, n):
        raise ValueError(f"P must be {n}x{n}, got shape {P.shape}")
    if not is_symmetric(P) or not is_pd(P):
        raise ValueError("P must be symmetric positive definite")

    A, G, Q, R, delta = params.A, params.G, params.Q, params.R, params.delta
    eye = np.eye(n)
    F = delta * A + eye
    S = R + delta * (G.T @ P @ G)
    try:
        X = np.linalg.solve(S, G.T @ P @ F)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular weighted innovation term R + delta G^T P G") from exc
    E = P @ A + A.T @ P + delta * (A.T @ P @ A) - F.T @ (P @ G) @ X + Q
    residual = float(np.linalg.norm(E))

    if delta > 0.0:
        P_inv = np.linalg.solve(P, eye)
        mid = sym_part(P_inv + delta * (G @ np.linalg.solve(R, G.T)))
        E_alt = F.T @ np.linalg.solve(mid, F) + delta * Q - P
        gap = float(np.linalg.norm(E_alt - delta * E))
        if gap > 1e-6 * max(1.0, float(np.linalg.norm(P))) ** 2:
            raise NumericalError(
                f"unified-equation residual forms disagree (gap {gap:.3e})"
            )
    return residual
