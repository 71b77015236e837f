"""Exponential convergence: spectrum of the update map against measured traces.

When no symbol is of kind II the iteration converges like ``theta^N``, with
``theta`` the largest Jacobian eigenvalue at the optimum. Occasionally the
initial distribution has no component along the dominant eigen-direction, and
the next eigenvalue takes over. The script prints the predicted rate and the
measured ``L(N) = -(1/N) ln ||lambda^N - lambda*||``.

    python3 demos/exponential_speed.py
"""

import math

import numpy as np

from arimoto_speed import (
    derivative_tensors,
    fit_empirical_rate,
    get_channel,
    predict_regime,
    run_trace,
    solve_capacity,
    spectral_report,
)

np.set_printoptions(precision=5, suppress=True)
N = 500

cases = {
    "phi1": [np.full(3, 1 / 3)],
    "phi3": [np.full(3, 1 / 3), np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.3, 0.1])],
    "phi4": [np.full(3, 1 / 3), np.array([1 / 2, 1 / 3, 1 / 6])],
}

for name, starts in cases.items():
    ch = get_channel(name)
    fp = solve_capacity(ch)
    spectral = spectral_report(fp, derivative_tensors(fp, ch))
    print(f"\n{name}: lambda* = {fp.lambda_star}, eigenvalues {np.sort(spectral.eigenvalues)}")
    print(f"  theta_max = {spectral.theta_max:.5f} (-ln = {-math.log(spectral.theta_max):.5f}), b_max = {spectral.b_max}")
    for lam0 in starts:
        pred = predict_regime(fp, spectral, lam0=lam0, channel=ch)
        tr = run_trace(ch, lam0, fp, N)
        emp = fit_empirical_rate(tr, N, regression_from=N // 2)
        print(f"  start {np.round(lam0, 4)}: predicted {pred.rate:.5f} via {pred.basis}, "
              f"L({N}) = {emp.L:.5f}, slope over [{N // 2}, {N}] = {emp.slope:.5f}")
