"""Two hand-computable micro-networks, worked end to end.

Case A: one neuron, one learned input weight, leak 0.5, linear output,
inputs (1, 1), zero targets.  All engines must return dL/dw = 3.25.

Case B: the same neuron with a fixed self synapse and no leak.  The exact
gradient of the input weight is 2, but the implicit-only approximation
sees just half of it: the other half travels through the explicit self
loop that the local traces drop.
"""

import numpy as np

from rnngrad import (NetworkSpec, ReadoutSpec, bptt_gradient, eprop_gradient,
                     local_jacobians, m_order_gradient, readout_forward,
                     rtrl_gradient, simulate, total_loss_partials)
from rnngrad.model import LeakyTanh
from rnngrad.oracle import fd_gradient


def run(spec, inputs, T, targets, label):
    traj = simulate(spec, inputs, T)
    jac = local_jacobians(spec, traj)
    y, loss = readout_forward(spec.readout, traj, targets)
    lp = total_loss_partials(spec.readout, y, targets)
    print(f"--- {label} ---")
    print("outputs o^1..o^T:", traj.o[1:, 0])
    print("loss:", loss)
    print("backward (bptt):  ", bptt_gradient(spec, traj, jac, lp).gradient)
    print("forward (rtrl):   ", rtrl_gradient(spec, traj, jac, lp).gradient)
    print("local (e-prop):   ", eprop_gradient(spec, traj, jac, lp).gradient)
    for m in range(1, T + 1):
        g = m_order_gradient(spec, traj, jac, lp, m).gradient
        print(f"order m={m}:        ", g)
    print("finite differences:", fd_gradient(spec, inputs, T, targets=targets))
    print()


readout = ReadoutSpec(kind="static", w_out=np.array([[1.0]]),
                      b_out=np.zeros(1))

spec_a = NetworkSpec(n=1, input_dim=1,
                     cell=LeakyTanh(leak=0.5, linear_output=True),
                     synapses=((0, 0),), weights=np.array([1.0]),
                     readout=readout)
run(spec_a, np.array([[1.0], [1.0]]), 2, np.zeros((3, 1)),
    "case A: no explicit recurrence, everything agrees at 3.25")

spec_b = NetworkSpec(n=1, input_dim=1,
                     cell=LeakyTanh(leak=0.0, linear_output=True),
                     synapses=((0, 0), (1, 0)), weights=np.array([1.0, 1.0]),
                     readout=readout)
run(spec_b, np.array([[1.0], [0.0]]), 2, np.zeros((3, 1)),
    "case B: self loop, exact 2.0 vs local 1.0, order 2 closes the gap")
