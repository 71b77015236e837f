"""Jacobian, Hessian and eigenstructure of the update map at a fixed point.

Matrices follow the row-vector convention used for deviations
``mu' = mu J``: entry ``(a, b)`` of the Jacobian is ``dF_b / dlam_a``,
the transpose of the usual layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arimoto import FixedPointReport
from .channel import ChannelError, as_matrix
from .numerics import (
    NumericsError,
    SingularMatrixError,
    invert,
    left_eigenvector,
    sym_eigen,
)

COLLISION_TOL = 1e-9
DIAGONALIZATION_TOL = 1e-8
RIGHT_EIGEN_TOL = 1e-8
ORTHOGONAL_TOL = 1e-10


class EigenvalueCollisionError(NumericsError):
    """A type-I eigenvalue coincides with a type-III one; no diagonalization."""


class SingularBlockError(NumericsError):
    """The leading eigenvector block is singular."""


@dataclass(frozen=True)
class DerivativeTensors:
    """First and second divergence derivatives at the fixed point.

    ``d1[a, b] = dD_b/dlam_a``, ``d2[i, a, b] = d^2 D_i / dlam_a dlam_b``,
    ``e_mat[a, b] = sum_k lam_k d1[k, a] d1[k, b]``.
    """

    d1: np.ndarray
    d2: np.ndarray
    e_mat: np.ndarray


@dataclass(frozen=True)
class SpectralReport:
    """Jacobian at the fixed point with its eigen-decomposition.

    Attributes
    ----------
    jacobian : ndarray (m, m)
    theta : ndarray (m,)
        Eigenvalue attached to each column of ``A``. Type-I positions hold
        the eigenvalues of the type-I block in ascending order; other
        positions hold their own diagonal entry.
    eigenvalues : ndarray (m,)
        All eigenvalues, ascending.
    A, A_inv : ndarray (m, m)
        Right eigenvectors as columns, ``A_inv @ J @ A = diag(theta)``.
    perm : tuple of int
        Index order with type I, then type III, then type II.
    A1, A2 : ndarray
        Blocks of ``A[perm][:, perm]``: rows/columns of types I and III,
        and the type-II rows against those columns.
    b_max : ndarray
        Unit left eigenvector for ``theta_max``.
    b_max_is_right : bool
        Whether ``b_max`` is also a right eigenvector.
    """

    jacobian: np.ndarray
    block_I: np.ndarray
    block_II: np.ndarray
    block_III: np.ndarray
    symmetric_form: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    eigenvalues: np.ndarray
    theta_max: float
    theta_sec: float
    A: np.ndarray
    A_inv: np.ndarray
    perm: tuple[int, ...]
    A1: np.ndarray
    A2: np.ndarray
    b_max: np.ndarray
    b_max_is_right: bool
    theta_max_in_type3: bool

    @property
    def Theta(self) -> np.ndarray:
        return np.diag(self.theta)

    def eigenvalues_by_type(self, fp: FixedPointReport) -> dict[str, list[float]]:
        return {
            "I": sorted(float(self.theta[i]) for i in fp.type1),
            "II": [float(self.theta[i]) for i in fp.type2],
            "III": [float(self.theta[i]) for i in fp.type3],
        }


@dataclass(frozen=True)
class BmaxTest:
    b_max: np.ndarray
    is_right_eigenvector: bool
    orthogonal_to_initial: bool
    overlap: float


def derivative_tensors(fp: FixedPointReport, channel) -> DerivativeTensors:
    """Divergence derivatives at ``fp.lambda_star``."""
    P = as_matrix(channel)
    Q = fp.q_star
    if np.any(Q <= 0):
        raise ChannelError("derivatives need a strictly positive output distribution")
    d1 = -(P / Q) @ P.T
    d1 = (d1 + d1.T) / 2
    d2 = np.einsum("aj,bj,cj,j->abc", P, P, P, 1.0 / Q**2)
    e_mat = d1.T @ (fp.lambda_star[:, None] * d1)
    return DerivativeTensors(d1, d2, e_mat)


def _exp_gaps(fp: FixedPointReport) -> np.ndarray:
    return np.exp(fp.effective_divergences() - fp.capacity)


def jacobian(fp: FixedPointReport, tensors: DerivativeTensors) -> np.ndarray:
    """Jacobian of the update map at the fixed point (row-vector convention).

    ``J[a, b] = e_b (delta_ab + lam_b d1[a, b]) + lam_b (1 - e_a)`` with
    ``e_i = exp(D_i - C)``. This reduces to ``delta_ab + lam_b (d1[a, b] +
    1 - e_a)`` on type-I columns, ``delta_ab`` on type-II columns and
    ``e_b delta_ab`` on type-III columns.
    """
    lam = fp.lambda_star
    e = _exp_gaps(fp)
    J = np.diag(e) + tensors.d1 * (e * lam)[None, :] + np.outer(1.0 - e, lam)
    J[:, list(fp.type2)] = np.eye(fp.m)[:, list(fp.type2)]
    return J


def hessian(fp: FixedPointReport, tensors: DerivativeTensors) -> np.ndarray:
    """Second derivatives ``h[i, a, b] = d^2 F_i / dlam_a dlam_b`` at the fixed point."""
    lam = fp.lambda_star
    e = _exp_gaps(fp)
    g = 1.0 - e
    d1, d2, E = tensors.d1, tensors.d2, tensors.e_mat
    m = lam.size
    eye = np.eye(m)
    # delta_{ia} d1[i, b] as a tensor indexed [i, a, b]
    delta_d1 = eye[:, :, None] * d1[:, None, :]
    lam_d1 = lam[:, None] * d1
    first = (delta_d1 + delta_d1.transpose(0, 2, 1)
             + lam[:, None, None] * (d1[:, :, None] * d1[:, None, :] + d2)
             + (eye + lam_d1)[:, :, None] * g[None, None, :]
             + (eye + lam_d1)[:, None, :] * g[None, :, None])
    shared = (e[:, None] + e[None, :]) * d1 + E - d1
    h = e[:, None, None] * first + lam[:, None, None] * (2.0 * np.outer(g, g) - shared)[None, :, :]
    return (h + h.transpose(0, 2, 1)) / 2


def type2_hessian_rows(fp: FixedPointReport, tensors: DerivativeTensors) -> np.ndarray:
    """Type-II rows via the short form ``delta_ib S_ia + delta_ia S_ib``."""
    e = _exp_gaps(fp)
    m = fp.m
    out = np.zeros((fp.m2, m, m))
    for r, i in enumerate(fp.type2):
        s = 1.0 - e + tensors.d1[i]
        out[r, :, i] += s
        out[r, i, :] += s
    return out


def _max_normalize(v: np.ndarray, tie_tol: float = 1e-9) -> np.ndarray:
    mags = np.abs(v)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - tie_tol))[0])
    return v / v[k]


def spectral_report(fp: FixedPointReport, tensors: DerivativeTensors) -> SpectralReport:
    """Jacobian, block eigenvalues and diagonalization at the fixed point.

    The type-I block ``J1`` satisfies ``I - J1 = B`` with
    ``sqrt(L) B sqrt(L)^-1`` symmetric positive definite
    (``L = diag(lam_I)``), so its eigenvalues come from a symmetric solver.
    Type-II columns contribute eigenvalue 1 and type-III columns their
    diagonal entry. Right eigenvectors for the type-I eigenvalues are
    extended to the other coordinates by ``v = U pi / (theta - theta_rest)``.

    Raises
    ------
    EigenvalueCollisionError
        If a type-I and a type-III eigenvalue agree within ``1e-9``.
    SingularBlockError
        If the eigenvector block ``A1`` cannot be inverted.
    """
    J = jacobian(fp, tensors)
    m = fp.m
    t1, t2, t3 = list(fp.type1), list(fp.type2), list(fp.type3)
    rest = t2 + t3
    sq = np.sqrt(fp.lambda_star[t1])
    B = np.eye(len(t1)) - J[np.ix_(t1, t1)]
    sym = sq[:, None] * B / sq[None, :]
    if np.max(np.abs(sym - sym.T)) > 1e-10:
        raise NumericsError("type-I block is not similar to a symmetric matrix")
    pairs = sym_eigen((sym + sym.T) / 2)
    beta = pairs.values
    if abs(beta.max() - 1.0) > 1e-9:
        raise NumericsError(f"largest eigenvalue of I - J1 is {beta.max():.12f}, expected 1")
    if beta.min() <= 0:
        raise NumericsError("I - J1 is not positive definite")

    theta = np.diag(J).copy()
    A = np.eye(m)
    # ascending type-I eigenvalues: reverse the ascending beta order
    for pos, k in zip(t1, range(len(t1) - 1, -1, -1)):
        th = 1.0 - beta[k]
        pi = pairs.vectors[:, k] / sq
        col = np.zeros(m)
        col[t1] = pi
        for r in rest:
            gap = th - theta[r]
            if abs(gap) < COLLISION_TOL:
                raise EigenvalueCollisionError(
                    f"type-I eigenvalue {th:.12g} collides with the eigenvalue of symbol {r + 1}")
            col[r] = np.dot(J[r, t1], pi) / gap
        theta[pos] = th
        A[:, pos] = _max_normalize(col)
    theta[t2] = 1.0
    A_inv = invert(A)
    recon = A_inv @ J @ A
    if np.max(np.abs(recon - np.diag(theta))) > DIAGONALIZATION_TOL:
        raise NumericsError("diagonalization check failed: A^-1 J A differs from diag(theta)")

    perm = tuple(t1 + t3 + t2)
    Ap = A[np.ix_(perm, perm)]
    mp = len(t1) + len(t3)
    A1, A2 = Ap[:mp, :mp], Ap[mp:, :mp]
    try:
        invert(A1)
    except SingularMatrixError as exc:
        raise SingularBlockError(f"eigenvector block A1 is singular: {exc}") from None

    eigenvalues = np.sort(theta)
    theta_max = float(eigenvalues[-1])
    theta_sec = float(eigenvalues[-2]) if m > 1 else theta_max
    b_max = left_eigenvector(J, theta_max)
    is_right = bool(np.linalg.norm(J @ b_max - theta_max * b_max) <= RIGHT_EIGEN_TOL)
    in_type3 = bool(t3) and bool(np.max(theta[t3]) >= theta_max - COLLISION_TOL)
    return SpectralReport(
        jacobian=J,
        block_I=J[np.ix_(t1, t1)],
        block_II=J[np.ix_(t2, t2)],
        block_III=J[np.ix_(t3, t3)],
        symmetric_form=sym,
        beta=beta,
        theta=theta,
        eigenvalues=eigenvalues,
        theta_max=theta_max,
        theta_sec=theta_sec,
        A=A,
        A_inv=A_inv,
        perm=perm,
        A1=A1,
        A2=A2,
        b_max=b_max,
        b_max_is_right=is_right,
        theta_max_in_type3=in_type3,
    )


def bmax_tests(spectral: SpectralReport, mu0) -> BmaxTest:
    """Check whether the slowest mode can be switched off by the initial point.

    Returns ``b_max``, whether it is also a right eigenvector of ``J`` and
    whether the initial deviation ``mu0`` is orthogonal to it.
    """
    mu0 = np.asarray(mu0, dtype=float)
    overlap = float(np.dot(mu0, spectral.b_max))
    return BmaxTest(spectral.b_max, spectral.b_max_is_right, abs(overlap) <= ORTHOGONAL_TOL, overlap)
