"""Second-order dynamics on the five-symbol channel.

With three kind-II symbols the slow part of the iteration reduces to a
quadratic recurrence in canonical form. The script builds the reduced model,
runs the full second-order recurrence from a point on the slow manifold, and
monitors the ordering and bound invariants of the canonical form from random
starts.

    python3 demos/second_order_dynamics.py
"""

import numpy as np

from arimoto_speed import (
    analyze_at,
    build_reduced_model,
    canonical_iterate,
    derivative_tensors,
    get_channel,
    hessian,
    second_order_iterate,
    spectral_report,
    stated_optimum,
)
from arimoto_speed.recurrence import manifold_start

np.set_printoptions(precision=5, suppress=True)
STEPS = 100_000

for name in ("phi5", "phi5_exact"):
    ch = get_channel(name)
    fp = analyze_at(ch, stated_optimum(name))
    tensors = derivative_tensors(fp, ch)
    spectral = spectral_report(fp, tensors)
    H = hessian(fp, tensors)
    model = build_reduced_model(fp, spectral, tensors, H)
    print(f"\n{name}: sigma = {model.sigma}, limits = {model.limits_full}")
    print(f"  canonical rows\n{model.p}\n  diagonally dominant: {model.diag_dominant}")
    run = second_order_iterate(manifold_start(model), spectral.jacobian, H, STEPS, every=STEPS // 10)
    print(f"  N mu at N = {STEPS}: {run.n_values[-1]}  (mass drift {run.max_mass_drift:.1e})")

    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(10):
        ct = canonical_iterate(rng.uniform(0.01, 0.5, size=model.m2), model.p, 2000, every=2000)
        violations += len(ct.ordering_violations)
    print(f"  ordering violations over 10 random canonical starts: {violations}")
