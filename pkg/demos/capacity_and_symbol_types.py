"""Capacity, optimal inputs and how each input symbol behaves at the optimum.

Every built-in channel is solved by the Arimoto-Blahut iteration. Symbols are
then sorted into three kinds: those carrying mass (I), massless ones whose
divergence still equals the capacity (II), and massless ones strictly below
it (III). Kinds II and III decide whether convergence is slow or fast.

    python3 demos/capacity_and_symbol_types.py
"""

import numpy as np

from arimoto_speed import channel_names, get_channel, kuhn_tucker_check, solve_capacity

np.set_printoptions(precision=5, suppress=True)

for name in channel_names():
    ch = get_channel(name)
    fp = solve_capacity(ch)
    kt = kuhn_tucker_check(fp.lambda_star, ch)
    print(f"{name:11s} C = {fp.capacity:.10f} nats  lambda* = {fp.lambda_star}")
    print(f"{'':11s} types {fp.index_types()}  D - C = {fp.divergences - fp.capacity}")
    print(f"{'':11s} KT violation {kt.max_violation:.1e}  iterations {fp.iterations}"
          f"{'  NEAR-DEGENERATE' if fp.near_degenerate else ''}")
    for w in fp.warnings:
        print(f"{'':11s} warning: {w}")
