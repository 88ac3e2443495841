"""Training with end-of-sequence updates versus per-step updates.

Offline (update after the full sequence): the forward recurrence engine
and the backward engine drive numerically identical parameter
trajectories, since both compute the same exact gradient.  Online
(update inside the sequence, using the causal per-step contributions):
the weight changes feed back into the dynamics, so the trajectory
genuinely differs; the divergence is a property of the update schedule,
not an implementation error.
"""

import numpy as np

from rnngrad.harness import (ExperimentConfig, make_task, train_offline,
                             train_online)

config = ExperimentConfig(T=16, learning_rate=0.005)
rng = np.random.default_rng(0)
spec, inputs, targets = make_task(config, rng)
iters = 50

loss_b, w_b = train_offline("bptt", spec, inputs, targets, iters,
                            config.learning_rate)
loss_r, w_r = train_offline("rtrl", spec, inputs, targets, iters,
                            config.learning_rate)
loss_on, w_on = train_online("rtrl", spec, inputs, targets, iters,
                             config.learning_rate)

print("offline loss, first and last iterations:")
print(f"  bptt: {loss_b[0]:.4f} -> {loss_b[-1]:.4f}")
print(f"  rtrl: {loss_r[0]:.4f} -> {loss_r[-1]:.4f}")
print(f"max parameter deviation bptt vs rtrl (offline): "
      f"{np.max(np.abs(w_b - w_r)):.3e}")
print()
print("online per-step rtrl loss, first and last iterations:")
print(f"  {loss_on[0]:.4f} -> {loss_on[-1]:.4f}")
print(f"parameter divergence online vs offline rtrl: "
      f"{np.max(np.abs(w_on - w_r)):.3e}  (expected to be large)")
