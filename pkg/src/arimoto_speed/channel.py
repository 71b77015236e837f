"""Channel matrices, distributions and information-theoretic primitives.

All logarithms are natural, so every divergence and capacity is in nats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

STOCHASTIC_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
ZERO_FLOOR = 1e-300


class ChannelError(ValueError):
    """Invalid channel matrix or distribution."""


class MatrixParseError(ChannelError):
    """Malformed matrix text; carries the source location."""

    def __init__(self, message: str, source: str = "<string>", line: int | None = None,
                 column: int | None = None):
        where = source if line is None else f"{source}:{line}" + ("" if column is None else f":{column}")
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line
        self.column = column


class InfiniteDivergenceError(ChannelError):
    """Reference distribution vanishes where the first one does not."""


@dataclass(frozen=True)
class ChannelMatrix:
    """Row-stochastic ``m x n`` transition matrix of a discrete memoryless channel.

    Row ``i`` holds the output distribution given input symbol ``i``.
    Construction validates stochasticity, the absence of useless output
    columns and full row rank.

    Parameters
    ----------
    probabilities : array_like
        Matrix entries.
    renormalize : bool
        Rescale rows whose sum misses one by more than ``1e-12`` but at most
        ``1e-9``; closer rows are kept bit for bit.
    """

    probabilities: np.ndarray
    renormalize: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        P = np.array(self.probabilities, dtype=float)
        if P.ndim != 2:
            raise ChannelError(f"channel matrix must be 2-D, got shape {P.shape}")
        m, n = P.shape
        if m < 2:
            raise ChannelError(f"need at least 2 input symbols, got {m}")
        if n < m:
            raise ChannelError(f"need n >= m for a full-rank channel, got m={m}, n={n}")
        if not np.all(np.isfinite(P)):
            raise ChannelError("channel matrix has non-finite entries")
        if np.any(P < 0):
            i, j = np.argwhere(P < 0)[0]
            raise ChannelError(f"entry ({i + 1},{j + 1}) is negative: {P[i, j]:g}")
        P[P < ZERO_FLOOR] = 0.0
        sums = P.sum(axis=1)
        for i, s in enumerate(sums):
            dev = abs(s - 1.0)
            if dev > STOCHASTIC_TOL and not (self.renormalize and dev <= RENORMALIZE_TOL):
                raise ChannelError(f"row {i + 1} sums to {s:.3f}")
        # rows already within STOCHASTIC_TOL keep their exact entries
        fix = np.abs(sums - 1.0) > STOCHASTIC_TOL
        if self.renormalize and np.any(fix):
            P[fix] = P[fix] / sums[fix, None]
        unused = np.flatnonzero(P.max(axis=0) == 0)
        if unused.size:
            raise ChannelError(f"output column {unused[0] + 1} is never used")
        rank = matrix_rank(P)
        if rank < m:
            raise ChannelError(f"channel matrix has rank {rank} < m = {m}")
        P.setflags(write=False)
        object.__setattr__(self, "probabilities", P)

    @property
    def m(self) -> int:
        return self.probabilities.shape[0]

    @property
    def n(self) -> int:
        return self.probabilities.shape[1]

    @property
    def rows(self) -> np.ndarray:
        return self.probabilities

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probabilities, dtype=dtype)


def as_matrix(channel) -> np.ndarray:
    """Return the probability array of a ``ChannelMatrix`` or array-like."""
    if isinstance(channel, ChannelMatrix):
        return channel.probabilities
    return np.asarray(channel, dtype=float)


def check_distribution(values, length: int | None = None, name: str = "distribution") -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ChannelError(f"{name} must be a vector")
    if length is not None and v.size != length:
        raise ChannelError(f"{name} has length {v.size}, expected {length}")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ChannelError(f"{name} has negative or non-finite entries")
    if abs(v.sum() - 1.0) > STOCHASTIC_TOL:
        raise ChannelError(f"{name} sums to {v.sum():.12g}, not 1")
    return v


def output_distribution(lam, channel) -> np.ndarray:
    """Output distribution ``Q = lam @ P`` induced by an input distribution."""
    P = as_matrix(channel)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (P.shape[0],):
        raise ChannelError(f"input distribution has length {lam.size}, channel has m={P.shape[0]}")
    return lam @ P


def kl_divergence(q, q_ref) -> float:
    """Kullback-Leibler divergence ``sum q ln(q/q_ref)`` in nats.

    Terms with ``q_j = 0`` contribute nothing.

    Raises
    ------
    InfiniteDivergenceError
        If ``q_ref`` vanishes somewhere ``q`` does not.
    """
    q = np.asarray(q, dtype=float)
    q_ref = np.asarray(q_ref, dtype=float)
    if q.shape != q_ref.shape:
        raise ChannelError(f"length mismatch: {q.shape} vs {q_ref.shape}")
    mask = q > ZERO_FLOOR
    if np.any(q_ref[mask] <= 0):
        raise InfiniteDivergenceError("reference distribution is zero where the first is positive")
    return float(np.sum(q[mask] * np.log(q[mask] / q_ref[mask])))


def divergences(lam, channel) -> np.ndarray:
    """Per-row divergences ``D_i = D(P^i || lam P)`` for every input symbol."""
    P = as_matrix(channel)
    Q = output_distribution(lam, P)
    return row_divergences(P, Q)


def row_divergences(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``D(P^i || Q)`` for every row of ``P``; infinite where support fails."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(P > 0, np.log(np.where(P > 0, P, 1.0) / Q), 0.0)
    return np.sum(P * logs, axis=1)


def mutual_information(lam, channel) -> float:
    """Mutual information ``I(lam, P) = sum_i lam_i D(P^i || lam P)`` in nats."""
    lam = np.asarray(lam, dtype=float)
    d = divergences(lam, channel)
    used = lam > 0
    return float(np.dot(lam[used], d[used]))


def mutual_information_direct(lam, channel) -> float:
    """Mutual information from the double sum over input/output pairs."""
    P = as_matrix(channel)
    lam = np.asarray(lam, dtype=float)
    Q = lam @ P
    total = 0.0
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            joint = lam[i] * P[i, j]
            if joint > 0:
                total += joint * np.log(P[i, j] / Q[j])
    return float(total)


def entropy(p) -> float:
    """Shannon entropy in nats."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def matrix_rank(matrix, rel_tol: float = 1e-10) -> int:
    """Numerical row rank by Gaussian elimination with partial pivoting.

    A pivot counts when its magnitude exceeds ``rel_tol`` times the largest
    absolute entry of the input.
    """
    M = np.array(as_matrix(matrix), dtype=float)
    rows, cols = M.shape
    thresh = rel_tol * np.abs(M).max() if M.size else 0.0
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(M[rank:, c])))
        if abs(M[p, c]) <= thresh:
            continue
        M[[rank, p]] = M[[p, rank]]
        M[rank + 1:] -= np.outer(M[rank + 1:, c] / M[rank, c], M[rank])
        rank += 1
    return rank


@dataclass(frozen=True)
class KuhnTuckerReport:
    """Kuhn-Tucker diagnostics at an input distribution."""

    divergences: np.ndarray
    capacity_estimate: float
    max_violation: float
    support: tuple[int, ...]
    support_spread: float

    def is_optimal(self, tol: float = 1e-9) -> bool:
        """True when no divergence exceeds the MI and the support is equalized."""
        return self.max_violation <= tol and self.support_spread <= tol


def kuhn_tucker_check(lam, channel, support_tol: float = 1e-12) -> KuhnTuckerReport:
    """Evaluate the Kuhn-Tucker optimality conditions at ``lam``.

    Violations are returned as data. ``max_violation`` is
    ``max_i D_i - I(lam, P)`` and ``support_spread`` is the largest
    ``|D_i - I|`` over the support.
    """
    P = as_matrix(channel)
    lam = np.asarray(lam, dtype=float)
    Q = output_distribution(lam, P)
    used = P.max(axis=0) > 0
    if np.any(Q[used] <= 0):
        raise ChannelError("induced output distribution vanishes on a used column")
    d = row_divergences(P, Q)
    mi = float(np.dot(lam[lam > 0], d[lam > 0]))
    support = tuple(int(i) for i in np.flatnonzero(lam > support_tol))
    spread = float(np.max(np.abs(d[list(support)] - mi))) if support else 0.0
    return KuhnTuckerReport(d, mi, float(np.max(d) - mi), support, spread)


def _numbers(line: str, source: str, lineno: int) -> list[float]:
    values = []
    for match in re.finditer(r"\S+", line):
        try:
            values.append(float(match.group()))
        except ValueError:
            raise MatrixParseError(f"not a number: {match.group()!r}", source, lineno,
                                   match.start() + 1) from None
    return values


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, raw


def parse_matrix(text: str, source: str = "<string>") -> ChannelMatrix:
    """Parse the plain-text matrix format.

    The first non-comment line holds ``m n``; ``m`` rows of ``n`` numbers
    follow. Lines starting with ``#`` are ignored.
    """
    lines = list(_content_lines(text))
    if not lines:
        raise MatrixParseError("empty matrix file", source)
    lineno, header = lines[0]
    dims = header.split()
    if len(dims) != 2 or not all(tok.isdigit() for tok in dims):
        raise MatrixParseError(f"header must be 'm n', got {header.strip()!r}", source, lineno, 1)
    m, n = int(dims[0]), int(dims[1])
    body = lines[1:]
    if len(body) != m:
        raise MatrixParseError(f"expected {m} rows, found {len(body)}", source,
                               body[-1][0] if body else lineno)
    rows = []
    for lineno, raw in body:
        values = _numbers(raw, source, lineno)
        if len(values) != n:
            raise MatrixParseError(f"expected {n} entries, found {len(values)}", source, lineno)
        rows.append(values)
    try:
        return ChannelMatrix(np.array(rows))
    except MatrixParseError:
        raise
    except ChannelError as exc:
        raise ChannelError(f"{source}: {exc}") from None


def read_matrix(path) -> ChannelMatrix:
    """Read a channel matrix file."""
    path = Path(path)
    return parse_matrix(path.read_text(), source=str(path))


def format_matrix(channel, comment: str | None = None) -> str:
    """Serialize a channel in the plain-text matrix format."""
    P = as_matrix(channel)
    out = [] if comment is None else [f"# {line}" for line in comment.splitlines()]
    out.append(f"{P.shape[0]} {P.shape[1]}")
    out.extend(" ".join(repr(float(x)) for x in row) for row in P)
    return "\n".join(out) + "\n"


def parse_vector(text: str, source: str = "<string>") -> np.ndarray:
    """Parse whitespace- or comma-separated numbers, ignoring ``#`` lines."""
    values: list[float] = []
    for lineno, raw in _content_lines(text):
        values.extend(_numbers(raw.replace(",", " "), source, lineno))
    if not values:
        raise MatrixParseError("no numbers found", source)
    return np.array(values)


def read_vector(path) -> np.ndarray:
    path = Path(path)
    return parse_vector(path.read_text(), source=str(path))
