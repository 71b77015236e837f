"""Extended-precision evaluation with mpmath.

Exponentially converging traces reach deviations far below double
precision (``||mu^500||`` near ``1e-35`` and MI gaps near ``1e-70`` are
typical), so traces and reference optima are computed here with a
configurable number of decimal digits. Float inputs are converted through
their shortest decimal representation, so ``0.793`` means exactly 0.793.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .channel import as_matrix


def to_mp(x) -> mpmath.mpf:
    return mpmath.mpf(repr(float(x)))


def mp_matrix(channel) -> list[list[mpmath.mpf]]:
    return [[to_mp(x) for x in row] for row in as_matrix(channel)]


def mp_vector(values) -> list[mpmath.mpf]:
    return [v if isinstance(v, mpmath.mpf) else to_mp(v) for v in values]


def mp_output(P, lam):
    n = len(P[0])
    return [mpmath.fsum(lam[i] * P[i][j] for i in range(len(P))) for j in range(n)]


def mp_divergences(P, lam):
    Q = mp_output(P, lam)
    return [mpmath.fsum(p * mpmath.log(p / q) for p, q in zip(row, Q) if p) for row in P]


def mp_mutual_information(P, lam):
    d = mp_divergences(P, lam)
    return mpmath.fsum(l * di for l, di in zip(lam, d) if l)


def mp_step(P, lam):
    """One update in extended precision."""
    d = mp_divergences(P, lam)
    top = max(di for l, di in zip(lam, d) if l)
    w = [l * mpmath.exp(di - top) if l else mpmath.mpf(0) for l, di in zip(lam, d)]
    total = mpmath.fsum(w)
    return [x / total for x in w]


def equalize(channel, support, start=None, dps: int = 60, max_newton: int = 200):
    """Solve the Kuhn-Tucker equalities on ``support`` by Newton's method.

    Finds masses on ``support`` (zero elsewhere) that sum to one and make
    ``D_i`` equal across the support. This is the extended-precision oracle
    for fixed points.

    Parameters
    ----------
    channel : ChannelMatrix or array_like
    support : sequence of int
        Indices carrying positive mass.
    start : array_like, optional
        Initial guess on the full alphabet; uniform on the support by default.
    dps : int
        Working precision in decimal digits.

    Returns
    -------
    list of mpmath.mpf
        The full-length optimum at precision ``dps``.
    """
    support = list(support)
    with mpmath.workdps(dps + 10):
        P = mp_matrix(channel)
        m = len(P)
        k = len(support)
        if start is None:
            x = [mpmath.mpf(1) / k] * k
        else:
            x = [to_mp(start[i]) for i in support]
            s = mpmath.fsum(x)
            x = [v / s for v in x]
        tol = mpmath.mpf(10) ** (-(dps + 2))
        for _ in range(max_newton):
            lam = [mpmath.mpf(0)] * m
            for idx, v in zip(support, x):
                lam[idx] = v
            Q = mp_output(P, lam)
            d = mp_divergences(P, lam)
            # residual: D_s - D_s0 for s != s0, and the mass constraint
            res = [d[s] - d[support[0]] for s in support[1:]] + [mpmath.fsum(x) - 1]
            # dD_i / dlam_k = -sum_j P_ij P_kj / Q_j
            deriv = [[-mpmath.fsum(P[i][j] * P[kk][j] / Q[j] for j in range(len(Q)))
                      for kk in support] for i in support]
            jac = mpmath.matrix(k, k)
            for r in range(k - 1):
                for c in range(k):
                    jac[r, c] = deriv[r + 1][c] - deriv[0][c]
            for c in range(k):
                jac[k - 1, c] = 1
            delta = mpmath.lu_solve(jac, mpmath.matrix(res))
            x = [v - delta[i] for i, v in enumerate(x)]
            if mpmath.norm(delta) < tol:
                break
        else:
            raise ArithmeticError("Newton equalization did not converge")
        lam = [mpmath.mpf(0)] * m
        for idx, v in zip(support, x):
            lam[idx] = v
    with mpmath.workdps(dps):
        return [+v for v in lam]


@dataclass(frozen=True)
class DegeneracyOutcome:
    """Extended-precision view of a channel's optimum."""

    channel: str
    support: tuple[int, ...]
    lambda_star: tuple[str, ...]
    capacity: str
    divergence_gaps: tuple[str, ...]

    def as_floats(self) -> dict:
        return {
            "lambda_star": [float(v) for v in self.lambda_star],
            "capacity": float(self.capacity),
            "divergence_gaps": [float(v) for v in self.divergence_gaps],
        }


def degeneracy_oracle(channel, name: str = "", dps: int = 50, digits: int = 12) -> DegeneracyOutcome:
    """Locate the exact optimum and its Kuhn-Tucker gaps at high precision.

    The support is found by trying supports in order of decreasing size and
    keeping the first whose Newton solution has nonnegative masses and no
    off-support divergence above the capacity. Gaps are ``D_i - C``.
    """
    from itertools import combinations

    m = as_matrix(channel).shape[0]
    with mpmath.workdps(dps):
        P = mp_matrix(channel)
        for size in range(m, 1, -1):
            for support in combinations(range(m), size):
                try:
                    lam = equalize(channel, support, dps=dps)
                except (ArithmeticError, ZeroDivisionError, ValueError):
                    continue
                if any(v <= 0 for i, v in enumerate(lam) if i in support):
                    continue
                d = mp_divergences(P, lam)
                cap = mp_mutual_information(P, lam)
                if all(d[i] <= cap for i in range(m) if i not in support):
                    return DegeneracyOutcome(
                        channel=name,
                        support=support,
                        lambda_star=tuple(mpmath.nstr(v, digits) for v in lam),
                        capacity=mpmath.nstr(cap, digits),
                        divergence_gaps=tuple(mpmath.nstr(di - cap, digits) for di in d),
                    )
    raise ArithmeticError("no Kuhn-Tucker point found")


def as_float_array(values) -> np.ndarray:
    return np.array([float(v) for v in values])
