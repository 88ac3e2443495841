"""How the truncation order trades locality against accuracy.

The m-order family keeps gradient paths with up to m - 1 explicit synaptic
jumps.  m = 1 is the fully local approximation, m = T recovers the exact
gradient.  This prints the relative L2 error and cosine similarity of
each order against the exact gradient for a few random networks.
"""

import numpy as np

from rnngrad import (bptt_gradient, local_jacobians, m_order_gradient,
                     readout_forward, simulate, total_loss_partials)
from rnngrad.harness import random_instance

for kind in ("leaky_tanh", "alif"):
    rng = np.random.default_rng(3)
    spec, inputs, T, targets = random_instance(rng, kind, max_n=8, max_T=12)
    traj = simulate(spec, inputs, T)
    jac = local_jacobians(spec, traj)
    y, _ = readout_forward(spec.readout, traj, targets)
    lp = total_loss_partials(spec.readout, y, targets)
    exact = bptt_gradient(spec, traj, jac, lp).gradient
    norm = np.linalg.norm(exact)
    print(f"=== {kind}, n={spec.n}, T={T} ===")
    print(" m   rel L2 error   cosine")
    for m in range(1, T + 1):
        g = m_order_gradient(spec, traj, jac, lp, m).gradient
        err = np.linalg.norm(g - exact) / norm
        cos = g @ exact / (np.linalg.norm(g) * norm)
        print(f"{m:2d}   {err:12.4e}   {cos:+.6f}")
    print()
