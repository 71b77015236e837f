"""Slow convergence at rate 1/N when a massless symbol meets the capacity bound.

At a kind-II symbol the Jacobian has eigenvalue 1 and the second-order terms
take over: ``N * (lambda^N - lambda*)`` tends to a fixed vector. The script
compares the predicted limit and the constant in ``C - I ~ const / N^2`` with
traces of the rounded right-triangle channel and its equalized variant.

    python3 demos/one_over_n_speed.py
"""

import numpy as np

from arimoto_speed import (
    analyze_at,
    build_reduced_model,
    derivative_tensors,
    get_channel,
    hessian,
    mi_gap_rate,
    predict_regime,
    run_trace,
    spectral_report,
    stated_optimum,
)

np.set_printoptions(precision=5, suppress=True)

for name in ("phi2", "phi2_exact"):
    ch = get_channel(name)
    fp = analyze_at(ch, stated_optimum(name))
    tensors = derivative_tensors(fp, ch)
    spectral = spectral_report(fp, tensors)
    model = build_reduced_model(fp, spectral, tensors, hessian(fp, tensors))
    pred = predict_regime(fp, spectral, model)
    const = mi_gap_rate(fp, pred, ch).value
    print(f"\n{name}: eigenvalues {np.sort(spectral.eigenvalues)}, sigma {model.sigma}")
    print(f"  predicted lim N mu = {pred.limits}, predicted N^2 (C - I) -> {const:.5f}")
    tr = run_trace(ch, np.full(3, 1 / 3), fp, 2000, dps=None)
    for n in (100, 500, 1000, 2000):
        print(f"  N = {n:5d}: N mu = {tr.n_mu[n]}, N^2 (C - I) = {n * n * tr.gap[n]:.5f}")

print("\nThe rounded channel drifts away from the prediction: its true optimum is")
print("interior (see docs/degeneracy_oracle.md), so the gap eventually turns negative.")
