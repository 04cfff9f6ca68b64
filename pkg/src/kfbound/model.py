"""Discrete-time linear Gaussian plant model and its validity checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .linalg import as_matrix, chol_psd, is_symmetric, singular_values, spectral_radius, sqrt_psd, sym_part

__all__ = ["LinearSystem", "ValidationReport", "validate_system", "generate_system"]

_INVERTIBILITY_RTOL = 1e-10
_RANK_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """State-space model x' = A x + B w, y = C x + n with w ~ N(0, Q).

    A is n_x by n_x, B is n_x by n_w, C is n_y by n_x and Q is the n_w by n_w
    process-noise covariance (symmetric positive semidefinite). All matrices
    are copied, validated and frozen at construction.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        Q = as_matrix(self.Q, "Q")
        n_x = A.shape[0]
        if A.shape != (n_x, n_x):
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape[0] != n_x:
            raise ValueError(f"B must have {n_x} rows, got shape {B.shape}")
        if C.shape[1] != n_x:
            raise ValueError(f"C must have {n_x} columns, got shape {C.shape}")
        n_w = B.shape[1]
        if Q.shape != (n_w, n_w):
            raise ValueError(f"Q must be {n_w}x{n_w} to match B, got shape {Q.shape}")
        if not is_symmetric(Q):
            raise ValueError("Q must be symmetric")
        if not chol_psd(Q, shift_tol=1e-10).ok:
            raise ValueError("Q must be positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Q", Q)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_w(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]

    def noise_covariance(self) -> np.ndarray:
        """Process-noise contribution B Q B^T in state coordinates."""
        return sym_part(self.B @ self.Q @ self.B.T)


@dataclass(frozen=True)
class ValidationReport:
    """Numeric summary of the model properties the solvers rely on."""

    spectral_radius_A: float
    a_stable: bool
    a_invertible: bool
    observable: bool
    controllable: bool
    warnings: Tuple[str, ...]


def _rank(M: np.ndarray) -> int:
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > _RANK_RTOL * s[0]))


def validate_system(system: LinearSystem) -> ValidationReport:
    """Check stability, invertibility and observability/controllability ranks.

    Observability and controllability are the stronger surrogates for
    detectability and stabilizability; when a rank test fails the report
    carries a warning instead of rejecting, because the steady-state solvers
    diagnose detectability operationally through convergence.
    """
    A, C = system.A, system.C
    n = system.n_x

    rho = spectral_radius(A)
    sv_a = singular_values(A)
    invertible = bool(sv_a[0] > 0.0 and sv_a[-1] > _INVERTIBILITY_RTOL * sv_a[0])

    obs_blocks = []
    block = C.copy()
    for _ in range(n):
        obs_blocks.append(block)
        block = block @ A
    observable = _rank(np.vstack(obs_blocks)) == n

    G = system.B @ sqrt_psd(system.Q)
    ctrl_blocks = []
    block = G.copy()
    for _ in range(n):
        ctrl_blocks.append(block)
        block = A @ block
    controllable = _rank(np.hstack(ctrl_blocks)) == n

    warnings = []
    if not observable:
        warnings.append(
            "observability rank test failed; detectability must be confirmed "
            "through convergence of the steady-state covariance iteration"
        )
    if not controllable:
        warnings.append(
            "controllability rank test failed; stabilizability must be confirmed "
            "through convergence of the steady-state covariance iteration"
        )
    if not invertible:
        warnings.append("A is numerically singular; the noise-floor design step requires A^-1")

    return ValidationReport(
        spectral_radius_A=rho,
        a_stable=bool(rho < 1.0),
        a_invertible=invertible,
        observable=observable,
        controllable=controllable,
        warnings=tuple(warnings),
    )


def generate_system(n: int, rho: float, seed: int, measurement_scale: float = 2.0) -> LinearSystem:
    """Reproducible random stable fixture.

    A is drawn entrywise from a standard normal using the counter-based
    Philox generator and rescaled so its largest singular value equals
    ``rho`` (hence spectral radius below one and invertibility with
    probability one). B = I, C = measurement_scale * I, Q = I.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    rng = np.random.Generator(np.random.Philox(seed))
    G = rng.standard_normal((n, n))
    A = rho * G / singular_values(G)[0]
    eye = np.eye(n)
    return LinearSystem(A=A, B=eye, C=measurement_scale * eye, Q=eye)
