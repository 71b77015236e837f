"""Reference anchors for the built-in channels.

Each target recomputes a group of published quantities and compares them
with the stated values at a fixed tolerance. Channels whose optimum lies on
the boundary are analyzed at the stated optimum; the others use the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .analysis import derivative_tensors, hessian, spectral_report
from .arimoto import analyze_at, solve_capacity
from .catalog import get_channel, stated_optimum
from .recurrence import build_reduced_model, canonical_iterate, manifold_start, second_order_iterate
from .speed import fit_empirical_rate, mi_gap_rate, predict_regime, run_trace

TARGETS = tuple([f"example{k}" for k in range(1, 9)] + [f"table{k}" for k in range(1, 4)])
TRACE_LENGTH = 500
SECOND_ORDER_STEPS = 100_000
UNIFORM3 = (1 / 3, 1 / 3, 1 / 3)


@dataclass(frozen=True)
class Anchor:
    """One expected-versus-computed comparison.

    Numeric anchors pass when ``|computed - expected| <= tol``; with
    ``relative`` set the tolerance is a fraction of ``|expected|``. Boolean
    anchors pass on equality.
    """

    target: str
    quantity: str
    expected: float | bool
    computed: float | bool
    tol: float = 0.0
    relative: bool = False

    @property
    def passed(self) -> bool:
        if isinstance(self.expected, bool):
            return bool(self.computed) == self.expected
        if self.computed is None or math.isnan(self.computed):
            return False
        bound = self.tol * abs(self.expected) if self.relative else self.tol
        return abs(self.computed - self.expected) <= bound

    @property
    def error(self) -> float | None:
        if isinstance(self.expected, bool):
            return None
        return abs(self.computed - self.expected)


@dataclass
class Series:
    """Data behind one chart: a shared x axis and named y columns."""

    name: str
    x_label: str
    y_label: str
    x: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class TargetResult:
    target: str
    anchors: list[Anchor]
    series: list[Series] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.anchors)


@lru_cache(maxsize=None)
def fixed_point(name: str):
    channel = get_channel(name)
    if name in ("phi1", "phi4"):
        return solve_capacity(channel)
    return analyze_at(channel, stated_optimum(name))


@lru_cache(maxsize=None)
def analysis_bundle(name: str):
    """``(fp, tensors, spectral, hessian, model)`` for a built-in channel."""
    channel = get_channel(name)
    fp = fixed_point(name)
    tensors = derivative_tensors(fp, channel)
    spectral = spectral_report(fp, tensors)
    hess = hessian(fp, tensors)
    model = build_reduced_model(fp, spectral, tensors, hess) if fp.m2 else None
    return fp, tensors, spectral, hess, model


@lru_cache(maxsize=None)
def trace(name: str, init: tuple[float, ...] | None = None, n_max: int = TRACE_LENGTH):
    channel = get_channel(name)
    fp = fixed_point(name)
    if init is None:
        init = tuple(np.full(fp.m, 1.0 / fp.m))
    return run_trace(channel, np.array(init), fp, n_max, channel_name=name)


def _vector(target, label, expected, computed, tol):
    return [Anchor(target, f"{label}[{i + 1}]", float(e), float(c), tol)
            for i, (e, c) in enumerate(zip(expected, computed))]


def _matrix(target, label, expected, computed, tol):
    expected = np.asarray(expected, dtype=float)
    return [Anchor(target, f"{label}[{i + 1},{j + 1}]", float(expected[i, j]), float(computed[i, j]), tol)
            for i in range(expected.shape[0]) for j in range(expected.shape[1])]


def _direction(target, label, expected, computed, tol):
    """Compare ``computed`` with ``expected`` up to sign and scale."""
    expected = np.asarray(expected, dtype=float)
    scaled = computed * np.linalg.norm(expected) / np.linalg.norm(computed)
    if np.dot(scaled, expected) < 0:
        scaled = -scaled
    return _vector(target, label, expected, scaled, tol)


def _l_series(name: str, traces: dict[str, object]) -> Series:
    first = next(iter(traces.values()))
    return Series(f"{name}_L", "N", "L(N)", first.n[1:],
                  {label: tr.L[1:] for label, tr in traces.items()})


def _n_mu_series(name: str, tr) -> Series:
    return Series(f"{name}_Nmu", "N", "N mu_i^N", tr.n[1:],
                  {f"Nmu_{i + 1}": tr.n_mu[1:, i] for i in range(tr.m)})


def example1() -> TargetResult:
    t = "example1"
    fp = fixed_point("phi1")
    return TargetResult(t, _vector(t, "lambda*", (0.431, 0.431, 0.138), fp.lambda_star, 2e-3)
                        + _vector(t, "Q*", (0.422, 0.422, 0.156), fp.q_star, 2e-3))


def _boundary_example(t: str, name: str, expected_type: str) -> TargetResult:
    fp = fixed_point(name)
    anchors = _vector(t, "Q*", (0.45, 0.45, 0.1), fp.q_star, 1e-3)
    anchors.append(Anchor(t, f"symbol 3 is type {expected_type}", True, fp.index_types()[2] == expected_type))
    return TargetResult(t, anchors)


def example2() -> TargetResult:
    return _boundary_example("example2", "phi2", "II")


def example3() -> TargetResult:
    return _boundary_example("example3", "phi3", "III")


def example4() -> TargetResult:
    t = "example4"
    fp, _, spectral, _, _ = analysis_bundle("phi1")
    tr = trace("phi1")
    J = [[0.308, -0.191, -0.117], [-0.191, 0.308, -0.117], [-0.369, -0.369, 0.738]]
    anchors = _matrix(t, "J", J, spectral.jacobian, 1e-3)
    anchors += _vector(t, "theta", (0.0, 0.5, 0.855), spectral.eigenvalues, 2e-3)
    anchors += _direction(t, "b_max", (-0.431, -0.431, 0.862), spectral.b_max, 2e-3)
    anchors.append(Anchor(t, "b_max is a right eigenvector", False, spectral.b_max_is_right))
    anchors.append(Anchor(t, "-ln theta_max", 0.157, -math.log(spectral.theta_max), 1e-3))
    anchors.append(Anchor(t, "L(500)", 0.161, float(tr.L[TRACE_LENGTH]), 5e-3))
    return TargetResult(t, anchors, [_l_series("phi1", {"uniform": tr})])


def example5() -> TargetResult:
    t = "example5"
    fp, _, spectral, _, _ = analysis_bundle("phi4")
    second = (1 / 2, 1 / 3, 1 / 6)
    tr1, tr2 = trace("phi4"), trace("phi4", second)
    J = [[0.443, -0.260, -0.183], [-0.260, 0.443, -0.183], [-0.218, -0.218, 0.436]]
    anchors = _vector(t, "lambda*", (0.352, 0.352, 0.296), fp.lambda_star, 2e-3)
    anchors += _matrix(t, "J", J, spectral.jacobian, 1e-3)
    anchors += _vector(t, "theta", (0.0, 0.618, 0.702), spectral.eigenvalues, 1e-3)
    anchors += _direction(t, "b_max", (-0.5, 0.5, 0.0), spectral.b_max, 1e-3)
    anchors.append(Anchor(t, "b_max is a right eigenvector", True, spectral.b_max_is_right))
    pred1 = predict_regime(fp, spectral, lam0=np.array(UNIFORM3))
    pred2 = predict_regime(fp, spectral, lam0=np.array(second))
    anchors.append(Anchor(t, "predicted rate, uniform start", 0.481, pred1.rate, 1e-3))
    anchors.append(Anchor(t, "predicted rate, (1/2,1/3,1/6) start", 0.353, pred2.rate, 1e-3))
    anchors.append(Anchor(t, "L(500), uniform start", 0.489, float(tr1.L[TRACE_LENGTH]), 5e-3))
    anchors.append(Anchor(t, "L(500), (1/2,1/3,1/6) start", 0.360, float(tr2.L[TRACE_LENGTH]), 5e-3))
    return TargetResult(t, anchors, [_l_series("phi4", {"uniform": tr1, "half_third_sixth": tr2})])


def example6() -> TargetResult:
    t = "example6"
    fp, _, spectral, hess, model = analysis_bundle("phi2")
    tr = trace("phi2")
    J = [[0.228, -0.228, 0.0], [-0.228, 0.228, 0.0], [-0.5, -0.5, 1.0]]
    anchors = _matrix(t, "J", J, spectral.jacobian, 1e-3)
    anchors += _vector(t, "theta", (0.0, 0.456, 1.0), spectral.eigenvalues, 1e-3)
    anchors += _matrix(t, "H_3", [[0, 0, -1], [0, 0, -1], [-1, -1, -4]], hess[2], 1e-9)
    anchors += _vector(t, "sigma", (1.0,), model.sigma, 1e-3)
    anchors += _vector(t, "lim N mu", (-0.5, -0.5, 1.0), model.limits_full, 1e-3)
    anchors += _vector(t, "N mu^N at 500", (-0.510, -0.510, 1.019), tr.n_mu[TRACE_LENGTH], 1e-2)
    return TargetResult(t, anchors, [_n_mu_series("phi2", tr)])


def example7(steps: int = SECOND_ORDER_STEPS) -> TargetResult:
    t = "example7"
    fp, tensors, spectral, hess, model = analysis_bundle("phi5")
    d1 = tensors.d1
    anchors = _vector(t, "theta", (0.0, 9 / 14, 1.0, 1.0, 1.0), spectral.eigenvalues, 1e-3)
    anchors.append(Anchor(t, "alpha = -D*_33", 1.576, -d1[2, 2], 1e-3))
    anchors.append(Anchor(t, "beta = -D*_34", 1.072, -d1[2, 3], 1e-3))
    anchors += _vector(t, "sigma", (1.389,) * 3, model.sigma, 1e-3)
    for i in range(3):
        row = np.roll([0.8, 0.1, 0.1], i)
        anchors += _vector(t, f"canonical row {i + 3}", row, model.p[i], 1e-3)
    anchors.append(Anchor(t, "diagonally dominant", True, model.diag_dominant))
    anchors += _vector(t, "lim N mu", (-2.083, -2.083, 1.389, 1.389, 1.389), model.limits_full, 1e-3)
    mu0 = manifold_start(model, np.full(3, 0.5))
    run = second_order_iterate(mu0, spectral.jacobian, hess, steps, every=max(1, steps // 1000))
    final = steps * run.at(steps)
    for i, expected in enumerate((-2.083, -2.083, 1.389, 1.389, 1.389)):
        anchors.append(Anchor(t, f"N mu_bar_{i + 1} at N={steps}", expected, float(final[i]), 1e-2,
                              relative=True))
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(10):
        can = canonical_iterate(rng.uniform(0.01, 0.5, size=3), model.p, 2000, every=100)
        violations += len(can.ordering_violations)
    anchors.append(Anchor(t, "ordering violations over 10 random starts", 0.0, float(violations), 0.0))
    scaled = run.n_values
    series = Series("phi5_second_order_Nmu", "N", "N mu_bar_i^N", run.n[1:],
                    {f"Nmu_{i + 1}": scaled[1:, i] for i in range(fp.m)})
    return TargetResult(t, anchors, [series])


def example8() -> TargetResult:
    t = "example8"
    fp, _, spectral, _, _ = analysis_bundle("phi3")
    tr = trace("phi3")
    J = [[0.228, -0.228, 0.0], [-0.228, 0.228, 0.0], [-0.428, -0.428, 0.856]]
    anchors = _matrix(t, "J", J, spectral.jacobian, 1e-3)
    anchors += _vector(t, "theta", (0.0, 0.456, 0.856), spectral.eigenvalues, 1e-3)
    gap = math.exp(fp.divergences[2] - fp.capacity)
    anchors.append(Anchor(t, "theta_3 = exp(D*_3 - C)", gap, float(spectral.theta[2]), 1e-9))
    anchors.append(Anchor(t, "-ln theta_max", 0.155, -math.log(spectral.theta_max), 1e-3))
    anchors.append(Anchor(t, "L(500)", 0.159, float(tr.L[TRACE_LENGTH]), 5e-3))
    return TargetResult(t, anchors, [_l_series("phi3", {"uniform": tr})])


def _mi_series(name: str, tr, n2: bool) -> Series:
    n = tr.n[1:]
    gap = tr.gap[1:]
    if n2:
        return Series(f"{name}_mi_gap", "N", "N^2 (C - I)", n, {"N2_gap": n * n * gap})
    with np.errstate(divide="ignore", invalid="ignore"):
        return Series(f"{name}_mi_gap", "N", "-(1/N) ln(C - I)", n, {"exponent": -np.log(gap) / n})


def _exponential_table(t: str, name: str, measured: float, predicted: float, tol: float) -> TargetResult:
    fp, _, spectral, _, model = analysis_bundle(name)
    tr = trace(name)
    pred = predict_regime(fp, spectral, model, np.array(UNIFORM3), channel=get_channel(name))
    rate = fit_empirical_rate(tr, TRACE_LENGTH)
    anchors = [Anchor(t, "-(1/N) ln(C - I) at N=500", measured, rate.mi_exponent, tol),
               Anchor(t, "predicted exponent", predicted, pred.mi_rate.value, 1e-3)]
    return TargetResult(t, anchors, [_mi_series(name, tr, n2=False)])


def table1() -> TargetResult:
    return _exponential_table("table1", "phi1", 0.324, 0.313, 1e-2)


def table2() -> TargetResult:
    t = "table2"
    fp, _, spectral, _, model = analysis_bundle("phi2")
    tr = trace("phi2")
    pred = predict_regime(fp, spectral, model, channel=get_channel("phi2"))
    rate = fit_empirical_rate(tr, TRACE_LENGTH)
    anchors = [Anchor(t, "N^2 (C - I) at N=500", 0.516, rate.n2_gap, 1e-2),
               Anchor(t, "predicted N^2 constant", 0.500, mi_gap_rate(fp, pred, get_channel("phi2")).value, 1e-3)]
    return TargetResult(t, anchors, [_mi_series("phi2", tr, n2=True)])


def table3() -> TargetResult:
    return _exponential_table("table3", "phi3", 0.163, 0.155, 5e-3)


RUNNERS = {name: globals()[name] for name in TARGETS}


def expand_targets(selection: str) -> list[str]:
    """Resolve ``all`` or a comma-separated list of target names."""
    names = list(TARGETS) if selection == "all" else [s.strip() for s in selection.split(",") if s.strip()]
    unknown = [n for n in names if n not in RUNNERS]
    if unknown:
        raise KeyError(f"unknown target(s): {', '.join(unknown)}; choose from {', '.join(TARGETS)} or all")
    return names


def run_target(name: str) -> TargetResult:
    return RUNNERS[name]()


def run_targets(names, jobs: int = 1) -> list[TargetResult]:
    """Run targets, optionally in worker processes; results keep input order."""
    names = list(names)
    if jobs <= 1 or len(names) <= 1:
        return [run_target(n) for n in names]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_target, names))


def format_table(results) -> str:
    """Plain-text table of every anchor."""
    lines = [f"{'target':<10} {'quantity':<44} {'expected':>12} {'computed':>14} {'tol':>9}  result"]
    for res in results:
        for a in res.anchors:
            if isinstance(a.expected, bool):
                exp, comp, tol = str(a.expected), str(bool(a.computed)), "-"
            else:
                exp, comp = f"{a.expected:.6g}", f"{a.computed:.8g}"
                tol = f"{a.tol:g}" + ("rel" if a.relative else "")
            lines.append(f"{a.target:<10} {a.quantity:<44} {exp:>12} {comp:>14} {tol:>9}  "
                         f"{'PASS' if a.passed else 'FAIL'}")
    total = sum(len(r.anchors) for r in results)
    failed = sum(not a.passed for r in results for a in r.anchors)
    lines.append(f"{total - failed}/{total} anchors passed")
    return "\n".join(lines) + "\n"
