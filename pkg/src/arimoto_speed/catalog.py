"""Built-in channel matrices used by the reproduction harness and demos."""

from __future__ import annotations

from functools import lru_cache

import mpmath
import numpy as np

from .channel import ChannelMatrix

_S, _T = 0.238, 0.324

CHANNEL_ROWS: dict[str, list[list[float]]] = {
    "phi1": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]],
    "phi2": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]],
    "phi3": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.35, 0.35, 0.3]],
    "phi4": [[0.793, 0.196, 0.011], [0.196, 0.793, 0.011], [0.25, 0.25, 0.5]],
    "phi5": [
        [0.6, 0.1, 0.1, 0.1, 0.1],
        [0.1, 0.6, 0.1, 0.1, 0.1],
        [_S, _S, _T, 0.1, 0.1],
        [_S, _S, 0.1, _T, 0.1],
        [_S, _S, 0.1, 0.1, _T],
    ],
}

# Stated optima. The first two are rounded to three decimals; the boundary
# ones are exact by symmetry.
STATED_OPTIMA: dict[str, list[float]] = {
    "phi1": [0.431, 0.431, 0.138],
    "phi2": [0.5, 0.5, 0.0],
    "phi3": [0.5, 0.5, 0.0],
    "phi4": [0.352, 0.352, 0.296],
    "phi5": [0.5, 0.5, 0.0, 0.0, 0.0],
}

BOUNDARY_OPTIMA = ("phi2", "phi3", "phi5")


EQUALIZED = ("phi2_exact", "phi5_exact")


def channel_names() -> list[str]:
    return sorted(CHANNEL_ROWS) + list(EQUALIZED)


def get_channel(name: str) -> ChannelMatrix:
    """Look up a built-in channel by name.

    ``phi1`` ... ``phi5`` hold the three-decimal entries. ``phi2_exact`` and
    ``phi5_exact`` are the equalized variants from :func:`equalized_rows`.
    """
    key = name.lower()
    if key in EQUALIZED:
        return ChannelMatrix(np.array(equalized_rows(key)))
    if key not in CHANNEL_ROWS:
        raise KeyError(f"unknown built-in channel {name!r}; choose from {', '.join(channel_names())}")
    return ChannelMatrix(np.array(CHANNEL_ROWS[key]))


def stated_optimum(name: str) -> np.ndarray:
    return np.array(STATED_OPTIMA[name.lower().removesuffix("_exact")])


def identity_channel(m: int) -> ChannelMatrix:
    return ChannelMatrix(np.eye(m))


def _divergence(row, q):
    return mpmath.fsum(p * mpmath.log(p / qq) for p, qq in zip(row, q) if p)


@lru_cache(maxsize=None)
def equalized_weight(name: str, dps: int = 40) -> str:
    """Free entry of an equalized channel, as a decimal string.

    ``phi2_exact`` replaces the third row of ``phi2`` by ``(a, a, 1-2a)`` and
    ``phi5_exact`` replaces ``(0.238, 0.238, 0.324, 0.1, 0.1)`` and its cyclic
    shifts by ``(s, s, 0.8-2s, 0.1, 0.1)``. In both cases the free entry is
    the root near the three-decimal value that makes the zero-mass symbols'
    divergence equal the capacity at the stated optimum, so those symbols
    sit exactly on the type-II boundary.
    """
    with mpmath.workdps(dps):
        f = mpmath.mpf
        if name == "phi2_exact":
            q = [f("0.45"), f("0.45"), f("0.1")]
            ref = [f("0.8"), f("0.1"), f("0.1")]

            def row(a):
                return [a, a, 1 - 2 * a]

            bracket = (f("0.29"), f("0.31"))
        elif name == "phi5_exact":
            q = [f("0.35"), f("0.35"), f("0.1"), f("0.1"), f("0.1")]
            ref = [f("0.6"), f("0.1"), f("0.1"), f("0.1"), f("0.1")]

            def row(s):
                return [s, s, f("0.8") - 2 * s, f("0.1"), f("0.1")]

            bracket = (f("0.23"), f("0.245"))
        else:
            raise KeyError(name)
        cap = _divergence(ref, q)
        root = mpmath.findroot(lambda x: _divergence(row(x), q) - cap, bracket, solver="anderson")
        return mpmath.nstr(root, dps - 5, strip_zeros=False)


def equalized_rows(name: str) -> list[list[float]]:
    w = float(equalized_weight(name))
    if name == "phi2_exact":
        return [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [w, w, 1.0 - 2.0 * w]]
    t = 0.8 - 2.0 * w
    return [
        [0.6, 0.1, 0.1, 0.1, 0.1],
        [0.1, 0.6, 0.1, 0.1, 0.1],
        [w, w, t, 0.1, 0.1],
        [w, w, 0.1, t, 0.1],
        [w, w, 0.1, 0.1, t],
    ]
