"""Convergence traces, regime prediction and mutual-information gap rates."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import hiprec
from .analysis import SpectralReport, bmax_tests
from .arimoto import FixedPointReport, _Kernel
from .channel import ChannelError, as_matrix, mutual_information
from .recurrence import ReducedModel

DEFAULT_DPS = 150


@dataclass
class ConvergenceTrace:
    """Per-iteration record of an unpruned Arimoto-Blahut run.

    Row ``k`` of every array belongs to iteration ``N = n[k]``. ``L`` is
    ``-(1/N) ln ||mu^N||`` (NaN at ``N = 0``), ``gap`` is ``C - I(lam^N)``
    with ``C = I(lam*)``. With ``dps`` set, the run and every derived
    quantity were computed with that many decimal digits before rounding to
    double.
    """

    n: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    norm_mu: np.ndarray
    L: np.ndarray
    mi: np.ndarray
    gap: np.ndarray
    lam0: np.ndarray
    lam_star: np.ndarray
    capacity: float
    dps: int | None
    reference: str
    channel_name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def n_mu(self) -> np.ndarray:
        # adding 0.0 turns the -0.0 of row N = 0 into 0.0
        return self.n[:, None] * self.mu + 0.0

    @property
    def m(self) -> int:
        return self.lam.shape[1]

    def index(self, n: int) -> int:
        if n < 0 or n >= self.n.size or self.n[n] != n:
            raise IndexError(f"iteration {n} outside the trace (0..{self.n[-1]})")
        return n

    def rate_exponent(self) -> np.ndarray:
        """``-(1/N) ln gap`` per iteration (NaN where undefined)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.log(self.gap) / self.n
        out[(self.n == 0) | (self.gap <= 0)] = np.nan
        return out

    def to_csv(self) -> str:
        """CSV with columns ``N, lambda_i, mu_i, norm_mu, L_N, Nmu_i, mi, gap``."""
        m = self.m
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N"] + [f"lambda_{i + 1}" for i in range(m)] + [f"mu_{i + 1}" for i in range(m)]
                        + ["norm_mu", "L_N"] + [f"Nmu_{i + 1}" for i in range(m)] + ["mi", "gap"])
        nmu = self.n_mu
        for k in range(self.n.size):
            row = [int(self.n[k])] + list(self.lam[k]) + list(self.mu[k]) + [self.norm_mu[k], self.L[k]] \
                + list(nmu[k]) + [self.mi[k], self.gap[k]]
            writer.writerow([v if isinstance(v, int) else _fmt(v) for v in row])
        return buf.getvalue()


def _fmt(x: float) -> str:
    x = float(x)
    if np.isnan(x):
        return "nan"
    return repr(x)


def _reference_point(channel, reference, dps: int | None):
    """Fixed point used for deviations, at the working precision."""
    if isinstance(reference, FixedPointReport):
        lam = reference.lambda_star
        if dps is not None and reference.provenance == "solved":
            return hiprec.equalize(channel, reference.type1, start=lam, dps=dps), "solved"
        provenance = reference.provenance
    else:
        lam = np.asarray(reference, dtype=float)
        provenance = "user_supplied"
    if dps is None:
        return lam, provenance
    with mpmath.workdps(dps):
        return hiprec.mp_vector(lam), provenance


def run_trace(channel, lam0, reference, n_max: int, dps: int | None = DEFAULT_DPS,
              channel_name: str = "") -> ConvergenceTrace:
    """Run the plain iteration from ``lam0`` and record convergence statistics.

    Parameters
    ----------
    channel : ChannelMatrix or array_like
    lam0 : array_like
        Strictly positive initial distribution.
    reference : FixedPointReport or array_like
        The fixed point deviations are measured from. A solved report is
        refined to the working precision by Newton equalization on its
        support; user-supplied values are taken as exact decimals.
    n_max : int
    dps : int or None
        Decimal digits for an mpmath run; ``None`` runs in double precision,
        which cannot resolve deviations below about ``1e-16``.
    """
    P = as_matrix(channel)
    lam0 = np.asarray(lam0, dtype=float)
    if lam0.shape != (P.shape[0],):
        raise ChannelError(f"initial distribution has length {lam0.size}, channel has m={P.shape[0]}")
    if np.any(lam0 <= 0):
        raise ChannelError("initial distribution must be strictly positive")
    if abs(lam0.sum() - 1) > 1e-12:
        raise ChannelError(f"initial distribution sums to {lam0.sum():.12g}")
    ref, provenance = _reference_point(channel, reference, dps)
    m = P.shape[0]
    rows = n_max + 1
    lam_out = np.empty((rows, m))
    mu_out = np.empty((rows, m))
    norm = np.empty(rows)
    L = np.full(rows, np.nan)
    mi = np.empty(rows)
    gap = np.empty(rows)

    if dps is None:
        kernel = _Kernel(P)
        ref = np.asarray(ref, dtype=float)
        cap = mutual_information(ref, P)
        lam = lam0.copy()
        for k in range(rows):
            if k:
                lam = kernel.step(lam)[0]
            d = kernel.divergences(lam)
            lam_out[k] = lam
            mu_out[k] = lam - ref
            norm[k] = np.linalg.norm(mu_out[k])
            mi[k] = float(np.dot(lam, d))
            gap[k] = cap - mi[k]
            if k and norm[k] > 0:
                L[k] = -np.log(norm[k]) / k
        capacity = cap
    else:
        with mpmath.workdps(dps):
            Pm = hiprec.mp_matrix(P)
            cap = hiprec.mp_mutual_information(Pm, ref)
            lam = hiprec.mp_vector(lam0)
            s = mpmath.fsum(lam)
            lam = [v / s for v in lam]
            for k in range(rows):
                if k:
                    lam = hiprec.mp_step(Pm, lam)
                mu = [a - b for a, b in zip(lam, ref)]
                nrm = mpmath.sqrt(mpmath.fsum(v * v for v in mu))
                info = hiprec.mp_mutual_information(Pm, lam)
                lam_out[k] = [float(v) for v in lam]
                mu_out[k] = [float(v) for v in mu]
                norm[k] = float(nrm)
                mi[k] = float(info)
                gap[k] = float(cap - info)
                if k and nrm > 0:
                    L[k] = float(-mpmath.log(nrm) / k)
            capacity = float(cap)
            ref = [float(v) for v in ref]
    return ConvergenceTrace(
        n=np.arange(rows),
        lam=lam_out,
        mu=mu_out,
        norm_mu=norm,
        L=L,
        mi=mi,
        gap=gap,
        lam0=lam0,
        lam_star=np.asarray(ref, dtype=float),
        capacity=capacity,
        dps=dps,
        reference=provenance,
        channel_name=channel_name,
    )


@dataclass(frozen=True)
class RegimePrediction:
    """Predicted asymptotic behavior of ``lam^N -> lam*``.

    ``kind`` is ``exponential``, ``one_over_N`` or ``near_degenerate``.
    ``basis`` names the eigenvalue behind an exponential ``rate``
    (``theta_max`` or ``theta_sec``). ``limits`` holds ``lim N mu^N`` for the
    ``one_over_N`` regime.
    """

    kind: str
    rate: float | None
    theta: float | None
    basis: str | None
    limits: np.ndarray | None
    initial_independent: bool
    near_degenerate: bool
    mi_rate: "MIGapPrediction | None" = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class MIGapPrediction:
    """Predicted behavior of ``C - I(lam^N)``.

    ``kind`` is ``exponential`` (``value`` is the exponent, gap ``~ e^{-value N}``),
    ``n2_constant`` (``value = lim N^2 gap``) or ``one_over_N_bound``.
    """

    kind: str
    value: float | None


def predict_regime(fp: FixedPointReport, spectral: SpectralReport, model: ReducedModel | None = None,
                   lam0=None, channel=None) -> RegimePrediction:
    """Predict the convergence regime from the fixed-point analysis.

    Without type-II symbols the decay is exponential at ``-ln theta_max``,
    or at ``-ln theta_sec`` when ``b_max`` is also a right eigenvector and the
    initial deviation is orthogonal to it. With type-II symbols the decay is
    ``O(1/N)`` with limits from the reduced model.
    """
    notes = []
    mu0 = None if lam0 is None else np.asarray(lam0, dtype=float) - fp.lambda_star
    if fp.m2 == 0:
        theta, basis = spectral.theta_max, "theta_max"
        if mu0 is not None:
            test = bmax_tests(spectral, mu0)
            if test.is_right_eigenvector and test.orthogonal_to_initial:
                theta, basis = spectral.theta_sec, "theta_sec"
                notes.append("initial deviation is orthogonal to b_max, which is also a right eigenvector")
        elif spectral.b_max_is_right:
            notes.append("b_max is a right eigenvector: initial points orthogonal to it converge at -ln theta_sec")
        rate = float(-np.log(theta)) if theta > 0 else float("inf")
        kind = "near_degenerate" if fp.near_degenerate else "exponential"
        if fp.near_degenerate:
            notes.extend(fp.warnings)
        pred = RegimePrediction(kind, rate, float(theta), basis, None, spectral.theta_max_in_type3,
                                fp.near_degenerate, None, tuple(notes))
    else:
        limits = None if model is None or model.limits_full is None else model.limits_full
        if model is None:
            notes.append("reduced model not supplied: limits unavailable")
        elif model.warnings:
            notes.extend(model.warnings)
        pred = RegimePrediction("one_over_N", None, 1.0, None, limits, False, fp.near_degenerate, None,
                                tuple(notes))
    if channel is not None:
        from dataclasses import replace

        pred = replace(pred, mi_rate=mi_gap_rate(fp, pred, channel))
    return pred


def mi_gap_rate(fp: FixedPointReport, prediction: RegimePrediction, channel) -> MIGapPrediction:
    """Predicted behavior of the mutual-information gap.

    Without type-III symbols an exponential state rate doubles and an
    ``O(1/N)`` state gives ``N^2 gap -> (1/2) sum_j (sum_i s_i P_ij)^2 / Q*_j``
    with ``s = lim N mu^N``. With type-III symbols the gap inherits the
    state rate.
    """
    if prediction.kind in ("exponential", "near_degenerate"):
        factor = 1.0 if fp.m3 else 2.0
        return MIGapPrediction("exponential", factor * prediction.rate)
    if fp.m3:
        return MIGapPrediction("one_over_N_bound", None)
    if prediction.limits is None:
        raise ValueError("the N^2 constant needs the limits of N mu^N")
    P = as_matrix(channel)
    v = prediction.limits @ P
    return MIGapPrediction("n2_constant", float(0.5 * np.sum(v**2 / fp.q_star)))


@dataclass(frozen=True)
class EmpiricalRate:
    n: int
    L: float
    mi_exponent: float
    n_mu: np.ndarray
    n2_gap: float
    slope: float | None = None


def fit_empirical_rate(trace: ConvergenceTrace, n: int, regression_from: int | None = None) -> EmpiricalRate:
    """Point statistics at iteration ``n``.

    Returns ``L(n)``, ``-(1/n) ln gap``, ``n mu^n`` and ``n^2 gap``. With
    ``regression_from`` set, also a least-squares slope of ``-ln ||mu^N||``
    over ``[regression_from, n]``.
    """
    k = trace.index(n)
    if n == 0:
        raise IndexError("window end must be positive")
    gap = trace.gap[k]
    exponent = float(-np.log(gap) / n) if gap > 0 else float("nan")
    slope = None
    if regression_from is not None:
        if not 0 <= regression_from < n:
            raise IndexError("regression window out of range")
        xs = trace.n[regression_from:k + 1]
        ys = -np.log(trace.norm_mu[regression_from:k + 1])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return EmpiricalRate(n, float(trace.L[k]), exponent, n * trace.mu[k], float(n * n * gap), slope)
