"""Cross-algorithm agreement on random dense networks.

For each cell kind (smooth leaky-tanh, LIF, adaptive-threshold LIF) this
draws random instances and compares the backward gradient against the
forward recurrence engine, the full-order truncation and (where the
dynamics are differentiable) central finite differences.  The exact
engines agree to float precision; finite differences agree to the usual
O(h^2) accuracy.
"""

import numpy as np

from rnngrad import (bptt_gradient, local_jacobians, m_order_gradient,
                     readout_forward, rtrl_gradient, simulate,
                     total_loss_partials)
from rnngrad.harness import random_instance, relative_deviation
from rnngrad.oracle import fd_gradient

for kind in ("leaky_tanh", "lif", "alif"):
    print(f"=== {kind} ===")
    for trial in range(3):
        rng = np.random.default_rng((kind == "lif", trial))
        spec, inputs, T, targets = random_instance(rng, kind, max_n=10,
                                                   max_T=32)
        traj = simulate(spec, inputs, T)
        jac = local_jacobians(spec, traj)
        y, _ = readout_forward(spec.readout, traj, targets)
        lp = total_loss_partials(spec.readout, y, targets)
        g_b = bptt_gradient(spec, traj, jac, lp).gradient
        g_r = rtrl_gradient(spec, traj, jac, lp).gradient
        g_m = m_order_gradient(spec, traj, jac, lp, T).gradient
        line = (f"n={spec.n:2d} T={T:2d}  "
                f"bptt vs rtrl {relative_deviation(g_b, g_r):.2e}  "
                f"bptt vs order-T {relative_deviation(g_b, g_m):.2e}")
        if not spec.cell.spiking:
            g_fd = fd_gradient(spec, inputs, T, targets=targets)
            line += f"  bptt vs fd {relative_deviation(g_b, g_fd):.2e}"
        else:
            line += "  (fd skipped: non-differentiable spikes)"
        print(line)
    print()
