"""Second-order deviation dynamics near a fixed point with type-II symbols.

Deviations ``mu = lam - lam*`` obey, up to second order,
``mu' = mu J + (1/2) [mu H_i mu^T]_i``. When type-II symbols exist the
linear part does not contract their coordinates and the quadratic term
decides the ``O(1/N)`` behavior. Eliminating the contracting coordinates
leaves an ``m2``-dimensional quadratic map with coefficients ``r``, which
after scaling by ``sigma`` becomes the canonical form
``xi'_i = xi_i - xi_i sum_k q_ik xi_k`` with probability-vector rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import DerivativeTensors, SpectralReport
from .arimoto import FixedPointReport, extended_F
from .numerics import SingularMatrixError, invert, lin_solve

CONSISTENCY_TOL = 1e-10


class ReductionError(ValueError):
    """The reduced model is undefined for this fixed point."""


class DivergenceError(ArithmeticError):
    """An iteration left the neighbourhood where the expansion is meaningful."""


@dataclass(frozen=True)
class ReducedModel:
    """Coefficients of the reduced quadratic recurrence on type-II coordinates.

    Matrices indexed by type-II symbols follow the order of ``fp.type2``.

    Attributes
    ----------
    S : ndarray (m2, m)
        ``S[r, a] = 1 - exp(D_a - C) + d1[i_r, a]``.
    T : ndarray (m2, m2)
        Contribution of the eliminated coordinates.
    r : ndarray (m2, m2)
        ``T + d1`` restricted to type II; the reduced recurrence is
        ``mu'_i = mu_i + mu_i sum_k r_ik mu_k``.
    sigma : ndarray (m2,) or None
        Solution of ``r sigma = -1``; ``None`` when ``r`` is singular.
    p : ndarray (m2, m2) or None
        Canonical coefficients ``-r_ik sigma_k``; rows sum to one.
    limits_full : ndarray (m,) or None
        Predicted ``lim N mu^N`` for every symbol.
    """

    type2: tuple[int, ...]
    others: tuple[int, ...]
    S: np.ndarray
    T: np.ndarray
    r: np.ndarray
    elimination: np.ndarray
    sigma: np.ndarray | None
    p: np.ndarray | None
    limits_full: np.ndarray | None
    diag_dominant: bool
    sigma_positive: bool
    consistency_error: float
    warnings: tuple[str, ...] = ()

    @property
    def m2(self) -> int:
        return len(self.type2)

    @property
    def m_prime(self) -> int:
        return len(self.others)

    @property
    def R(self) -> np.ndarray:
        return self.r

    def full_deviation(self, mu_type2) -> np.ndarray:
        """Full deviation vector on the slow manifold for given type-II values."""
        mu_type2 = np.asarray(mu_type2, dtype=float)
        out = np.zeros(self.m_prime + self.m2)
        out[list(self.type2)] = mu_type2
        out[list(self.others)] = -mu_type2 @ self.elimination
        return out


def build_reduced_model(fp: FixedPointReport, spectral: SpectralReport, tensors: DerivativeTensors,
                        hessian: np.ndarray | None = None, seed: int = 0) -> ReducedModel:
    """Reduce the second-order recurrence to the type-II coordinates.

    On the slow manifold the other coordinates follow
    ``mu_others = -mu_II A2 A1^-1``. Substituting this into the type-II rows
    of the Hessian gives the coefficients ``r``. When ``hessian`` is given,
    the reduction is cross-checked against direct evaluation for random
    type-II deviations.

    Raises
    ------
    ReductionError
        If there are no type-II symbols.
    """
    if fp.m2 == 0:
        raise ReductionError("no type-II symbols: the reduced recurrence is undefined")
    t2 = list(fp.type2)
    others = list(spectral.perm[: fp.m1 + fp.m3])
    e = np.exp(fp.effective_divergences() - fp.capacity)
    d1 = tensors.d1
    S = 1.0 - e[None, :] + d1[t2, :]
    zeta = invert(spectral.A1)
    elimination = spectral.A2 @ zeta
    T = -S[:, others] @ elimination.T
    r = T + d1[np.ix_(t2, t2)]
    warnings = []
    sigma = p = limits = None
    try:
        sigma = lin_solve(r, -np.ones(len(t2)))
    except SingularMatrixError:
        warnings.append("r is singular: canonical form unavailable")
    if sigma is not None:
        p = -r * sigma[None, :]
        limits = np.zeros(fp.m)
        limits[t2] = sigma
        limits[others] = -sigma @ elimination
        if np.any(sigma <= 0):
            warnings.append("sigma has a nonpositive component; the O(1/N) limits are not justified")
    sigma_positive = sigma is not None and bool(np.all(sigma > 0))
    dominant = False
    if p is not None:
        diag = np.diag(p)
        dominant = bool(np.all(diag > p.sum(axis=1) - diag))

    model = ReducedModel(tuple(t2), tuple(others), S, T, r, elimination, sigma, p, limits,
                         dominant, sigma_positive, 0.0, tuple(warnings))
    err = 0.0
    if hessian is not None:
        err = reduction_consistency(model, hessian, seed=seed)
        if err > CONSISTENCY_TOL:
            raise ReductionError(f"reduced coefficients disagree with the Hessian by {err:.3e}")
    from dataclasses import replace

    return replace(model, consistency_error=err)


def reduction_consistency(model: ReducedModel, hessian: np.ndarray, trials: int = 5, seed: int = 0) -> float:
    """Largest relative mismatch between the reduced and the direct quadratic term."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        mu2 = rng.normal(size=model.m2)
        mu = model.full_deviation(mu2)
        direct = 0.5 * np.einsum("a,iab,b->i", mu, hessian[list(model.type2)], mu)
        reduced = mu2 * (model.r @ mu2)
        worst = max(worst, float(np.max(np.abs(direct - reduced)) / max(1.0, np.max(np.abs(direct)))))
    return worst


@dataclass
class IterationTrace:
    """Sampled iterates of a recurrence."""

    n: np.ndarray
    values: np.ndarray
    max_mass_drift: float = 0.0

    @property
    def n_values(self) -> np.ndarray:
        return self.n[:, None] * self.values

    def at(self, n: int) -> np.ndarray:
        k = int(np.searchsorted(self.n, n))
        if k >= self.n.size or self.n[k] != n:
            raise KeyError(f"iteration {n} was not recorded")
        return self.values[k]


def _sample_points(n_steps: int, every: int) -> np.ndarray:
    pts = np.arange(0, n_steps + 1, every)
    if pts[-1] != n_steps:
        pts = np.append(pts, n_steps)
    return pts


def second_order_iterate(mu0, jacobian: np.ndarray, hessian: np.ndarray, n_steps: int,
                         every: int = 1) -> IterationTrace:
    """Iterate ``mu' = mu J + (1/2)[mu H_i mu^T]_i``.

    Parameters
    ----------
    mu0 : array_like
        Initial deviation; its entries must sum to zero.
    jacobian, hessian : ndarray
        From :func:`~arimoto_speed.analysis.spectral_report` and
        :func:`~arimoto_speed.analysis.hessian`.
    n_steps : int
    every : int
        Record every ``every``-th iterate (the last one is always kept).

    Raises
    ------
    DivergenceError
        If ``||mu|| > 1`` at some step.
    """
    mu = np.array(mu0, dtype=float)
    m = mu.size
    if abs(mu.sum()) > 1e-12:
        raise ValueError(f"initial deviation must sum to zero, got {mu.sum():.3e}")
    flat_h = 0.5 * hessian.reshape(m, m * m)
    keep = _sample_points(n_steps, every)
    out = np.empty((keep.size, m))
    out[0] = mu
    slot = 1
    drift = 0.0
    for k in range(1, n_steps + 1):
        mu = mu @ jacobian + flat_h @ np.outer(mu, mu).ravel()
        drift = max(drift, abs(mu.sum()))
        if not np.all(np.isfinite(mu)) or np.linalg.norm(mu) > 1.0:
            raise DivergenceError(f"second-order iteration diverged at step {k}: ||mu|| = {np.linalg.norm(mu):.3g}")
        if slot < keep.size and keep[slot] == k:
            out[slot] = mu
            slot += 1
    return IterationTrace(keep, out, drift)


def manifold_start(model: ReducedModel, xi0=None) -> np.ndarray:
    """Initial deviation ``sigma_i xi0_i`` on type II, continued onto the slow manifold.

    ``xi0`` defaults to ``1/2`` in every coordinate.
    """
    if model.sigma is None:
        raise ReductionError("sigma unavailable")
    xi0 = np.full(model.m2, 0.5) if xi0 is None else np.asarray(xi0, dtype=float)
    return model.full_deviation(model.sigma * xi0)


def reduced_iterate(mu0_type2, model: ReducedModel, n_steps: int, every: int = 1) -> IterationTrace:
    """Iterate ``mu'_i = mu_i + mu_i sum_k r_ik mu_k`` on the type-II coordinates."""
    mu = np.array(mu0_type2, dtype=float)
    keep = _sample_points(n_steps, every)
    out = np.empty((keep.size, mu.size))
    out[0] = mu
    slot = 1
    for k in range(1, n_steps + 1):
        mu = mu + mu * (model.r @ mu)
        if not np.all(np.isfinite(mu)) or np.linalg.norm(mu) > 1.0:
            raise DivergenceError(f"reduced iteration diverged at step {k}")
        if slot < keep.size and keep[slot] == k:
            out[slot] = mu
            slot += 1
    return IterationTrace(keep, out)


@dataclass
class CanonicalTrace:
    """Canonical-form iterates with invariant monitors.

    Attributes
    ----------
    xi : ndarray
        Recorded iterates (rows), at iterations ``n``.
    ordering_violations : list of (N, (a, b))
        Steps where the descending order present at ``N = 0`` broke, as the
        adjacent pair ``a`` ranked above ``b`` with ``xi_a < xi_b``.
    n0 : int
        First iteration from which the final descending order holds through
        the horizon.
    bounds_ok, decreasing_ok : bool
        ``0 < xi <= 1/2`` throughout and strict decrease of every coordinate.
    partial_sum, partial_sum_bound : float or None
        ``sum_{N >= n0} (xi_first - xi_last)`` and its bound
        ``xi_first^{n0} / (K xi_last^{n0})`` with ``K = q_ff + q_ll - 1`` in
        final order; ``None`` when ``K <= 0`` or ``m2 == 1``.
    """

    n: np.ndarray
    xi: np.ndarray
    ordering_violations: list = field(default_factory=list)
    n0: int = 0
    bounds_ok: bool = True
    decreasing_ok: bool = True
    partial_sum: float | None = None
    partial_sum_bound: float | None = None

    @property
    def n_xi(self) -> np.ndarray:
        return self.n[:, None] * self.xi

    @property
    def partial_sum_ok(self) -> bool | None:
        if self.partial_sum_bound is None:
            return None
        return self.partial_sum <= self.partial_sum_bound * (1 + 1e-12)


def canonical_iterate(xi0, q, n_steps: int, every: int = 1, max_violations: int = 100) -> CanonicalTrace:
    """Iterate the canonical form and monitor its invariants.

    Parameters
    ----------
    xi0 : array_like
        Initial values in ``(0, 1/2]``.
    q : array_like (m2, m2)
        Canonical coefficients with probability-vector rows.
    n_steps, every : int
    max_violations : int
        Cap on the stored ordering violations.
    """
    xi = np.array(xi0, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(xi <= 0) or np.any(xi > 0.5):
        raise ValueError("canonical initial values must lie in (0, 1/2]")
    if np.any(q < -1e-12) or np.max(np.abs(q.sum(axis=1) - 1)) > 1e-10:
        raise ValueError("canonical coefficients must have probability-vector rows")
    m2 = xi.size
    start_order = np.argsort(-xi, kind="stable")
    keep = _sample_points(n_steps, every)
    out = np.empty((keep.size, m2))
    out[0] = xi
    slot = 1
    violations: list = []
    bounds_ok = decreasing_ok = True
    history = []
    for k in range(1, n_steps + 1):
        new = xi - xi * (q @ xi)
        if np.any(new <= 0) or np.any(new > 0.5):
            bounds_ok = False
        if np.any(new >= xi):
            decreasing_ok = False
        xi = new
        ordered = xi[start_order]
        bad = np.flatnonzero(ordered[:-1] < ordered[1:])
        if bad.size and len(violations) < max_violations:
            violations.extend((k, (int(start_order[b]), int(start_order[b + 1]))) for b in bad)
        history.append(xi.copy())
        if slot < keep.size and keep[slot] == k:
            out[slot] = xi
            slot += 1

    trace = CanonicalTrace(keep, out, violations[:max_violations], bounds_ok=bounds_ok,
                           decreasing_ok=decreasing_ok)
    hist = np.vstack([np.array(xi0, dtype=float)] + history)
    final_order = np.argsort(-hist[-1], kind="stable")
    in_order = np.all(np.diff(hist[:, final_order], axis=1) <= 0, axis=1)
    broken = np.flatnonzero(~in_order)
    trace.n0 = int(broken[-1] + 1) if broken.size else 0
    if m2 > 1:
        first, last = final_order[0], final_order[-1]
        K = q[first, first] + q[last, last] - 1.0
        if K > 0 and trace.n0 < hist.shape[0]:
            seg = hist[trace.n0:]
            trace.partial_sum = float(np.sum(seg[:, first] - seg[:, last]))
            trace.partial_sum_bound = float(seg[0, first] / (K * seg[0, last]))
    return trace


def scalar_logistic(nu0: float, n_steps: int) -> np.ndarray:
    """Iterates of ``nu' = nu - nu^2``; ``N nu^N`` tends to one."""
    if not 0 < nu0 <= 0.5:
        raise ValueError("nu0 must lie in (0, 1/2]")
    out = np.empty(n_steps + 1)
    out[0] = nu = float(nu0)
    for k in range(1, n_steps + 1):
        nu = nu - nu * nu
        out[k] = nu
    return out


@dataclass(frozen=True)
class DivisibilityResult:
    column: int
    theta: float
    max_projection: float
    threshold: float
    passed: bool


def divisibility_check(channel, fp: FixedPointReport, spectral: SpectralReport, trials: int = 5,
                       radius: float = 1e-3, seed: int = 0) -> list[DivisibilityResult]:
    """Test whether ``(F(lam) - lam*) . a_k`` vanishes whenever ``mu . a_k`` does.

    For every eigenvector column ``a_k`` with eigenvalue below one, random
    deviations of norm ``radius`` orthogonal to ``a_k`` and to the all-ones
    vector are pushed through the map. A generic map leaves a residual of
    order ``radius**2``; the check passes when every residual stays below
    ``1e-4 * radius**2``.
    """
    rng = np.random.default_rng(seed)
    lam_star = fp.lambda_star
    m = fp.m
    ones = np.ones(m) / np.sqrt(m)
    threshold = 1e-4 * radius**2
    results = []
    for k in range(m):
        if spectral.theta[k] >= 1.0 - 1e-12:
            continue
        a = spectral.A[:, k]
        basis = [ones]
        resid = a - sum(np.dot(a, b) * b for b in basis)
        if np.linalg.norm(resid) > 1e-12:
            basis.append(resid / np.linalg.norm(resid))
        worst = 0.0
        for _ in range(trials):
            mu = rng.normal(size=m)
            for b in basis:
                mu -= np.dot(mu, b) * b
            mu *= radius / np.linalg.norm(mu)
            image = extended_F(lam_star + mu, channel) - lam_star
            worst = max(worst, abs(float(np.dot(image, a))))
        results.append(DivisibilityResult(k, float(spectral.theta[k]), worst, threshold, worst <= threshold))
    return results
