"""Dense symmetric/spectral kernels used by every other module.

Thin deterministic wrappers around LAPACK (through ``numpy.linalg``) plus a
pivot-reporting semidefinite Cholesky. Functions accept anything array-like,
never mutate their inputs, and return fresh arrays. Matrices returned by
:func:`as_matrix` are marked read-only so they can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError

__all__ = [
    "as_matrix",
    "as_vector",
    "sym_part",
    "is_symmetric",
    "SymEig",
    "sym_eig",
    "spectral_radius",
    "singular_values",
    "CholResult",
    "chol_psd",
    "is_pd",
    "pinv_sym",
    "sqrt_psd",
]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Copy ``a`` into a read-only 2-D float array, rejecting NaN/Inf entries."""
    m = np.array(a, dtype=float, order="C", copy=True)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    m.flags.writeable = False
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Copy ``a`` into a read-only 1-D float array, rejecting NaN/Inf entries."""
    v = np.array(a, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    v.flags.writeable = False
    return v


def sym_part(M: np.ndarray) -> np.ndarray:
    """Symmetric part (M + M^T) / 2."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def is_symmetric(M: np.ndarray, tol: float = 1e-9) -> bool:
    """True when ||M - M^T||_F <= tol * ||M||_F."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        return False
    return np.linalg.norm(M - M.T) <= tol * np.linalg.norm(M)


@dataclass(frozen=True, eq=False)
class SymEig:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` are sorted non-increasing and ``eigenvectors[:, i]`` pairs
    with ``eigenvalues[i]``; the eigenvector matrix is orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(M, tol: float = 1e-9) -> SymEig:
    """Full eigendecomposition of a symmetric matrix.

    The input is symmetrized as (M + M^T)/2 before decomposition; asymmetry
    beyond ``tol`` (relative Frobenius) is rejected. Output is deterministic
    for identical input.
    """
    M = as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"sym_eig requires a square matrix, got shape {M.shape}")
    if not is_symmetric(M, tol):
        raise ValueError("sym_eig requires a symmetric matrix (asymmetry exceeds tol)")
    try:
        w, v = np.linalg.eigh(sym_part(M))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalError(f"symmetric eigendecomposition failed: {exc}") from exc
    return SymEig(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def spectral_radius(M) -> float:
    """Largest eigenvalue magnitude of a (generally non-symmetric) square matrix."""
    M = as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"spectral_radius requires a square matrix, got shape {M.shape}")
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc
    return float(np.max(np.abs(ev)))


def singular_values(M) -> np.ndarray:
    """Singular values of M, sorted non-increasing."""
    M = as_matrix(M, "M")
    return np.linalg.svd(M, compute_uv=False)


@dataclass(frozen=True, eq=False)
class CholResult:
    """Outcome of a tolerant Cholesky attempt.

    ``factor`` is the lower-triangular L with L L^T ~= M on success, and None
    otherwise; ``failed_pivot`` is the 1-based pivot index that went below the
    tolerance when the matrix is not (semi)definite.
    """

    factor: Optional[np.ndarray]
    failed_pivot: Optional[int]

    @property
    def ok(self) -> bool:
        return self.factor is not None


def chol_psd(M, shift_tol: float = 1e-10) -> CholResult:
    """Cholesky factorization that tolerates eigenvalues down to -shift_tol.

    Pivots in (-shift_tol, 0] are treated as exact zeros (their column is
    zeroed), so M succeeds whenever it is positive semidefinite up to the
    tolerance. A pivot below -shift_tol reports failure instead of raising;
    a not-PD outcome is a result, not an error.
    """
    M = as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"chol_psd requires a square matrix, got shape {M.shape}")
    S = sym_part(M)
    n = S.shape[0]
    L = np.zeros_like(S)
    for j in range(n):
        d = S[j, j] - L[j, :j] @ L[j, :j]
        if d < -shift_tol:
            return CholResult(factor=None, failed_pivot=j + 1)
        if d <= 0.0:
            continue  # semidefinite pivot; column stays zero
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (S[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return CholResult(factor=L, failed_pivot=None)


def is_pd(M, tol: float = 0.0) -> bool:
    """Strict positive-definiteness test via Cholesky pivots."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1] or not is_symmetric(M):
        return False
    try:
        np.linalg.cholesky(sym_part(M) - tol * np.eye(M.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def pinv_sym(M, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Eigenvalues with magnitude at most ``rank_tol`` times the largest
    magnitude are treated as zero.
    """
    dec = sym_eig(M)
    w = dec.eigenvalues
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0:
        return np.zeros_like(dec.eigenvectors)
    inv = np.where(np.abs(w) > rank_tol * scale, 1.0, 0.0)
    with np.errstate(divide="ignore"):
        inv = np.where(inv > 0.0, 1.0 / np.where(w == 0.0, 1.0, w), 0.0)
    return sym_part((dec.eigenvectors * inv) @ dec.eigenvectors.T)


def sqrt_psd(M, tol: float = 1e-9) -> np.ndarray:
    """Symmetric PSD square root; tiny negative eigenvalues are clamped to zero."""
    dec = sym_eig(M, tol)
    w = np.clip(dec.eigenvalues, 0.0, None)
    return sym_part((dec.eigenvectors * np.sqrt(w)) @ dec.eigenvectors.T)
