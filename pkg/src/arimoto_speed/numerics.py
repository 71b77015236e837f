"""Small dense linear algebra used by the spectral analysis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

SYMMETRY_TOL = 1e-10
OFFDIAG_TOL = 1e-13
MAX_SWEEPS = 50
PIVOT_TOL = 1e-12
EIGENVALUE_TOL = 1e-8


class NumericsError(ArithmeticError):
    """Base class for numerical failures."""


class SingularMatrixError(NumericsError):
    pass


class ConvergenceFailure(NumericsError):
    pass


@dataclass(frozen=True)
class EigenPairs:
    """Ascending eigenvalues with unit-norm eigenvectors stored as columns."""

    values: np.ndarray
    vectors: np.ndarray


def _offdiag_norm(M: np.ndarray) -> float:
    # summed directly: ||M||^2 - ||diag||^2 cancels once the rotations converge
    off = M - np.diag(np.diag(M))
    return float(np.linalg.norm(off))


def sym_eigen(M, max_sweeps: int = MAX_SWEEPS, tol: float = OFFDIAG_TOL) -> EigenPairs:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    M : array_like
        Symmetric matrix; asymmetry above ``1e-10`` is rejected.
    max_sweeps : int
        Sweep budget before giving up.
    tol : float
        Stop when the off-diagonal Frobenius norm drops below ``tol * ||M||_F``.

    Returns
    -------
    EigenPairs
        Eigenvalues ascending, eigenvectors as columns with the largest
        magnitude entry positive.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if A.size and np.max(np.abs(A - A.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(A))):
        raise ValueError("matrix is not symmetric")
    A = (A + A.T) / 2
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    target = tol * scale
    for _ in range(max_sweeps + 1):
        if _offdiag_norm(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                if abs(A[p, p]) + g == abs(A[p, p]) and abs(A[q, q]) + g == abs(A[q, q]):
                    # negligible against both diagonal entries
                    A[p, q] = A[q, p] = 0.0
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau == 0:
                    t = 1.0
                elif abs(tau) > 1e150:
                    t = 1.0 / (2.0 * tau)  # tau^2 would overflow
                else:
                    t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ rot
                A[idx, :] = rot.T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ rot
    else:
        raise ConvergenceFailure(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    order = np.argsort(np.diag(A), kind="stable")
    values = np.diag(A)[order]
    vectors = np.column_stack([normalize_sign(V[:, k]) for k in order]) if n else V
    return EigenPairs(values, vectors)


def normalize_sign(v, tie_tol: float = 1e-9) -> np.ndarray:
    """Flip ``v`` so that its first largest-magnitude entry is positive."""
    v = np.asarray(v, dtype=float)
    mags = np.abs(v)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - tie_tol))[0])
    return -v if v[k] < 0 else v.copy()


def _lu(M: np.ndarray):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    with warnings.catch_warnings():
        # singularity is reported below with a pivot test of our own
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    biggest = np.max(np.abs(M)) if M.size else 0.0
    pivots = np.abs(np.diag(lu))
    if biggest == 0.0 or np.min(pivots) < PIVOT_TOL * biggest:
        raise SingularMatrixError(
            f"matrix is singular: smallest pivot {np.min(pivots):.3e} vs max entry {biggest:.3e}")
    return lu, piv


def lin_solve(M, b) -> np.ndarray:
    """Solve ``M x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        When a pivot is below ``1e-12`` times the largest entry of ``M``.
    """
    return scipy.linalg.lu_solve(_lu(M), np.asarray(b, dtype=float))


def invert(M) -> np.ndarray:
    """Matrix inverse through the same pivot-checked LU factorization."""
    M = np.asarray(M, dtype=float)
    return scipy.linalg.lu_solve(_lu(M), np.eye(M.shape[0]))


def left_eigenvector(M, theta: float, iterations: int = 3, tol: float = EIGENVALUE_TOL) -> np.ndarray:
    """Unit left eigenvector ``b`` with ``b M = theta b``.

    Runs inverse iteration on the transpose with a slightly perturbed shift
    from a fixed seed, then fixes the sign so the first largest-magnitude
    component is positive.

    Raises
    ------
    NumericsError
        If ``theta`` is not an eigenvalue of ``M`` to within ``tol``.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    Mt = M.T
    scale = max(1.0, np.max(np.abs(M)))
    _, sing, vt = np.linalg.svd(Mt - theta * np.eye(n))
    null_dim = int(np.sum(sing <= tol * scale))
    if null_dim >= 2:
        # degenerate eigenspace: project the first standard basis vector that
        # has a component in it
        basis = vt[n - null_dim:]
        for k in range(n):
            b = basis.T @ basis[:, k]
            if np.linalg.norm(b) > 1e-8:
                break
    else:
        shifted = Mt - (theta + 1e-10 * scale) * np.eye(n)
        # deterministic seed with no special symmetry
        b = np.cos(np.arange(1, n + 1) * 0.7 + 0.3)
        b /= np.linalg.norm(b)
        try:
            for _ in range(iterations):
                b = lin_solve(shifted, b)
                b /= np.linalg.norm(b)
        except SingularMatrixError:
            b = vt[-1]
    b = normalize_sign(b / np.linalg.norm(b))
    residual = np.linalg.norm(b @ M - theta * b)
    if residual > tol * scale:
        raise NumericsError(f"{theta:.6g} is not an eigenvalue (residual {residual:.3e})")
    return b
