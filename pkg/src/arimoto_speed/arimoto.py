"""The Arimoto-Blahut iteration, capacity solving and fixed-point classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelError,
    as_matrix,
    check_distribution,
    entropy,
    kuhn_tucker_check,
    output_distribution,
    row_divergences,
)

# zero-mass symbols whose divergence gap is below this many nats, and
# support symbols lighter than NEAR_DEGENERATE_MASS, trigger a warning
NEAR_DEGENERATE_NATS = 0.1
NEAR_DEGENERATE_MASS = 1e-2


@dataclass(frozen=True)
class IterationSettings:
    """Stopping and pruning controls for :func:`solve_capacity`.

    Attributes
    ----------
    max_iters : int
        Iteration budget.
    fixed_point_tol : float
        Stop when the Euclidean step ``||lam' - lam||`` falls below this.
    prune_tol : float
        Mass below which a symbol becomes a pruning candidate.
    prune_margin : float
        A candidate is pruned only if its divergence is this many nats below
        the running capacity estimate.
    prune : bool
        Set to False for a plain, unmodified iteration.
    kt_tol : float
        Kuhn-Tucker residual accepted as converged when the budget runs out.
    """

    max_iters: int = 1_000_000
    fixed_point_tol: float = 1e-14
    prune_tol: float = 1e-12
    prune_margin: float = 1e-9
    prune: bool = True
    kt_tol: float = 1e-8

    def __post_init__(self):
        for name in ("fixed_point_tol", "prune_tol", "prune_margin", "kt_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class FixedPointReport:
    """A fixed point of the iteration with its index classification.

    Indices are zero-based. ``type1`` holds symbols with positive mass,
    ``type2`` zero-mass symbols whose divergence reaches the capacity and
    ``type3`` zero-mass symbols strictly below it.
    """

    lambda_star: np.ndarray
    q_star: np.ndarray
    capacity: float
    divergences: np.ndarray
    type1: tuple[int, ...]
    type2: tuple[int, ...]
    type3: tuple[int, ...]
    kt_residual: float
    provenance: str
    converged: bool = True
    iterations: int = 0
    near_degenerate: bool = False
    warnings: tuple[str, ...] = ()
    class_tol: float = 1e-9
    class_tol_nats: float = 1e-2

    @property
    def m(self) -> int:
        return self.lambda_star.size

    @property
    def m1(self) -> int:
        return len(self.type1)

    @property
    def m2(self) -> int:
        return len(self.type2)

    @property
    def m3(self) -> int:
        return len(self.type3)

    def index_types(self) -> list[str]:
        """Per-index labels ``'I'``, ``'II'`` or ``'III'``."""
        labels = [""] * self.m
        for name, group in (("I", self.type1), ("II", self.type2), ("III", self.type3)):
            for i in group:
                labels[i] = name
        return labels

    def effective_divergences(self) -> np.ndarray:
        """Divergences with the Kuhn-Tucker equalities imposed exactly.

        Symbols of type I and II get ``D_i = C``; type III keeps its computed
        value. All derivative formulas are evaluated with these values, which
        makes a rounded or user-supplied optimum behave as an exact one.
        """
        d = self.divergences.copy()
        d[list(self.type1 + self.type2)] = self.capacity
        return d


class _Kernel:
    """Precomputed row terms so ``D = sum_j P log P - P @ log Q`` is cheap."""

    def __init__(self, P: np.ndarray):
        self.P = P
        self.used = P.max(axis=0) > 0
        with np.errstate(divide="ignore"):
            logp = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
        self.neg_row_entropy = np.sum(P * logp, axis=1)

    def divergences(self, lam: np.ndarray) -> np.ndarray:
        Q = lam @ self.P
        if np.any(Q[self.used] <= 0):
            raise ChannelError("induced output distribution has a zero on a used column")
        return self.neg_row_entropy - self.P @ np.log(Q)

    def step(self, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = self.divergences(lam)
        pos = lam > 0
        if not np.any(pos):
            raise ChannelError("input distribution has no positive entry")
        # log-space: scale by the largest exponent on the support
        w = np.zeros_like(lam)
        w[pos] = lam[pos] * np.exp(d[pos] - d[pos].max())
        return w / w.sum(), d


def ab_step(lam, channel) -> np.ndarray:
    """One Arimoto-Blahut update ``lam_i e^{D_i} / sum_k lam_k e^{D_k}``.

    Evaluated in log space. Zero components stay zero.
    """
    P = as_matrix(channel)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (P.shape[0],):
        raise ChannelError(f"input distribution has length {lam.size}, channel has m={P.shape[0]}")
    return _Kernel(P).step(lam)[0]


def extended_F(lam, channel) -> np.ndarray:
    """The update map on arbitrary real vectors near the simplex.

    No renormalization of ``lam`` is done and negative entries are allowed;
    only the induced output ``lam @ P`` must stay positive. Used for
    finite-difference checks of the analytic derivatives.
    """
    P = as_matrix(channel)
    lam = np.asarray(lam, dtype=float)
    Q = lam @ P
    if np.any(Q <= 0):
        raise ChannelError("extended map needs a strictly positive induced output")
    w = lam * np.exp(row_divergences(P, Q))
    return w / w.sum()


def solve_capacity(channel, settings: IterationSettings | None = None,
                   class_tol_nats: float = 1e-6) -> FixedPointReport:
    """Capacity-achieving input distribution by the Arimoto-Blahut iteration.

    Starts from the uniform distribution. Symbols whose mass drops below
    ``prune_tol`` while their divergence sits ``prune_margin`` under the
    running capacity estimate are removed, which keeps convergence fast when
    zero-mass symbols are present.

    Parameters
    ----------
    channel : ChannelMatrix or array_like
    settings : IterationSettings, optional
    class_tol_nats : float
        Divergence gap at or below which a zero-mass symbol counts as type II.

    Returns
    -------
    FixedPointReport
        ``converged`` is False when the budget ran out with a Kuhn-Tucker
        residual above ``settings.kt_tol``.
    """
    settings = settings or IterationSettings()
    P = as_matrix(channel)
    m = P.shape[0]
    kernel = _Kernel(P)
    lam = np.full(m, 1.0 / m)
    stopped = False
    it = 0
    for it in range(1, settings.max_iters + 1):
        new, d = kernel.step(lam)
        step = np.linalg.norm(new - lam)
        lam = new
        if settings.prune:
            small = (lam > 0) & (lam < settings.prune_tol)
            if np.any(small) and _prune(lam, small, kernel, settings):
                continue
        if step < settings.fixed_point_tol:
            # a symbol still decaying geometrically can make the step tiny
            # before its mass reaches prune_tol
            lingering = (lam > 0) & (lam < np.sqrt(settings.prune_tol))
            if settings.prune and np.any(lingering) and _prune(lam, lingering, kernel, settings):
                continue
            stopped = True
            break
    report = classify(P, lam, provenance="solved", class_tol=0.0, class_tol_nats=class_tol_nats)
    converged = stopped or report.kt_residual <= settings.kt_tol
    warnings = report.warnings
    if not converged:
        warnings = warnings + (
            f"iteration budget of {settings.max_iters} exhausted with Kuhn-Tucker residual "
            f"{report.kt_residual:.3e}",)
    return _replace(report, converged=converged, iterations=it, warnings=warnings)


def _prune(lam, candidates, kernel, settings) -> bool:
    d = kernel.divergences(lam)
    cap = float(np.dot(lam, d))
    drop = candidates & (d < cap - settings.prune_margin)
    if not np.any(drop):
        return False
    lam[drop] = 0.0
    lam /= lam.sum()
    return True


def _replace(report: FixedPointReport, **changes) -> FixedPointReport:
    from dataclasses import replace

    return replace(report, **changes)


def analyze_at(channel, lam_given, class_tol: float = 1e-9, class_tol_nats: float = 1e-2) -> FixedPointReport:
    """Build a fixed-point report treating ``lam_given`` as the optimum.

    Symbols with mass above ``class_tol`` are type I. A zero-mass symbol is
    type II when ``C - D_i <= class_tol_nats`` and type III otherwise. The
    Kuhn-Tucker residual is reported but not enforced.
    """
    P = as_matrix(channel)
    lam = check_distribution(lam_given, P.shape[0], "fixed point")
    return classify(P, lam, provenance="user_supplied", class_tol=class_tol,
                    class_tol_nats=class_tol_nats)


def classify(channel, lam, provenance: str, class_tol: float, class_tol_nats: float) -> FixedPointReport:
    """Classify the indices of a candidate optimum and assemble the report."""
    P = as_matrix(channel)
    lam = np.asarray(lam, dtype=float).copy()
    lam[lam <= class_tol] = 0.0
    lam /= lam.sum()
    try:
        kt = kuhn_tucker_check(lam, P, support_tol=0.0)
    except ChannelError as exc:
        raise ChannelError(f"fixed point induces a zero output probability: {exc}") from None
    cap, d = kt.capacity_estimate, kt.divergences
    support = lam > 0
    type1 = tuple(int(i) for i in np.flatnonzero(support))
    if len(type1) < 2:
        raise ChannelError("a fixed point of a full-rank channel needs at least two support symbols")
    gaps = cap - d
    type2 = tuple(int(i) for i in np.flatnonzero(~support & (gaps <= class_tol_nats)))
    type3 = tuple(int(i) for i in np.flatnonzero(~support & (gaps > class_tol_nats)))
    residual = max(kt.support_spread, max(kt.max_violation, 0.0))

    warnings = []
    near = False
    for i in type3:
        if gaps[i] < NEAR_DEGENERATE_NATS:
            near = True
            warnings.append(
                f"near-degenerate: symbol {i + 1} has zero mass with divergence only {gaps[i]:.3e} nats "
                "below capacity; the type II/III split is numerically delicate")
    for i in type1:
        if lam[i] < NEAR_DEGENERATE_MASS:
            near = True
            warnings.append(
                f"near-degenerate: symbol {i + 1} carries only {lam[i]:.3e} of the input mass; "
                "a nearby channel has it as a zero-mass symbol")
    for i in type2:
        if gaps[i] < 0:
            warnings.append(
                f"symbol {i + 1} is treated as type II but its divergence exceeds the capacity "
                f"estimate by {-gaps[i]:.3e} nats")
    return FixedPointReport(
        lambda_star=lam,
        q_star=output_distribution(lam, P),
        capacity=cap,
        divergences=d,
        type1=type1,
        type2=type2,
        type3=type3,
        kt_residual=float(residual),
        provenance=provenance,
        near_degenerate=near,
        warnings=tuple(warnings),
        class_tol=class_tol,
        class_tol_nats=class_tol_nats,
    )


@dataclass
class CBoundDiagnostics:
    """Per-iteration lower bound quantity and its 1/N bound."""

    n: np.ndarray
    c_next: np.ndarray
    bound: np.ndarray
    slack: np.ndarray
    bound_constant: float
    capacity: float
    extra: dict = field(default_factory=dict)


def c_next_value(lam_prev, lam_next, channel) -> float:
    """``C(N+1, N)`` from consecutive iterates.

    ``-sum lam'_i ln lam'_i + sum_ij lam'_i P_ij ln(lam_i P_ij / Q_j)`` with
    ``Q = lam P``; it equals the capacity at the fixed point.
    """
    P = as_matrix(channel)
    lam_prev = np.asarray(lam_prev, dtype=float)
    lam_next = np.asarray(lam_next, dtype=float)
    Q = lam_prev @ P
    total = entropy(lam_next)
    for i in np.flatnonzero(lam_next > 0):
        row = P[i]
        pos = row > 0
        total += lam_next[i] * np.sum(row[pos] * np.log(lam_prev[i] * row[pos] / Q[pos]))
    return float(total)


def c_bound_diagnostics(lams, fp: FixedPointReport, channel) -> CBoundDiagnostics:
    """Track ``C(N+1, N)`` along a sequence of iterates.

    Parameters
    ----------
    lams : array_like, shape (N+1, m)
        Iterates ``lam^0 ... lam^N``, typically ``trace.lam``.
    fp : FixedPointReport
    channel : ChannelMatrix

    Returns
    -------
    CBoundDiagnostics
        ``c_next[k]`` is ``C(k+1, k)``; ``bound[k]`` is
        ``(ln m - h(lam*)) / (k+1)``; ``slack`` is ``bound - (C - c_next)``.
    """
    lams = np.asarray(lams, dtype=float)
    m = lams.shape[1]
    values = np.array([c_next_value(lams[k], lams[k + 1], channel) for k in range(len(lams) - 1)])
    n = np.arange(1, len(lams))
    constant = float(np.log(m) - entropy(fp.lambda_star))
    bound = constant / n
    return CBoundDiagnostics(n, values, bound, bound - (fp.capacity - values), constant, fp.capacity)
