"""Exact gradient by forward propagation of recurrence variables (RTRL).

The recurrence variable alpha^{t,r}_{ij} accumulates, for every neuron r
and synapse (i, j), the influence of w_ij on h^t_r through all paths of
implicit and explicit recurrences.  One bank of n * p d_h-vectors is kept
(a single time slice) and advanced causally:

    alpha^{t,r} = D^t_r alpha^{t-1,r}
                  + sum_k E^{t-1}[r][k] (psi^{t-1}_k . alpha^{t-1,k})
                  + delta_{r=j} G^t_{ij}

The implicit source enters through the r = j injection, which makes
alpha^{t,j} contain the implicit variable eps^t as its order-0 part.
"""

import time

import numpy as np

from .report import GradientReport


def zero_recurrence_bank(spec):
    """alpha (n, p, d_h): one vector per (neuron r, synapse)."""
    return np.zeros((spec.n, spec.p, spec.d_h))


def rtrl_step(bank, jac, t, spec):
    """Advance the recurrence bank from step t-1 to step t."""
    tgt = spec.targets
    new = np.einsum("rab,rpb->rpa", jac.D[t], bank)
    s = np.einsum("kb,kpb->kp", jac.psi[t - 1], bank)
    new += np.einsum("rka,kp->rpa", jac.E[t - 1], s)
    new[tgt, np.arange(spec.p), :] += jac.G[t]
    return new


def rtrl_gradient(spec, traj, jac, loss_partials):
    """dL/dw_ij = sum_t sum_k dL/do^t_k (partial) psi^t_k alpha^{t,k}_{ij}.

    Per-step contributions C^t (the inner sum at fixed t, summed over k in
    ascending order) are returned; accumulating them in ascending t
    reproduces the returned gradient bit for bit.
    """
    start = time.perf_counter()
    T, p, n, d_h = traj.T, spec.p, spec.n, spec.d_h
    bank = zero_recurrence_bank(spec)
    grad = np.zeros(p)
    per_step = np.zeros((T + 1, p))
    n_E = jac.nonzero_E_pairs()
    flops = 0
    for t in range(1, T + 1):
        bank = rtrl_step(bank, jac, t, spec)
        a = np.einsum("kb,kpb->kp", jac.psi[t], bank)   # recurrence traces
        per_step[t] = loss_partials[t] @ a
        grad += per_step[t]
        flops += (n * p * d_h * d_h      # D propagation
                  + n * p * d_h          # suffix scalars psi . alpha
                  + n_E * p * d_h        # explicit jumps
                  + p * d_h              # G injection
                  + n * p * (d_h + 1))   # contraction with loss partials
    return GradientReport(gradient=grad, per_step=per_step, flops=flops,
                          trace_floats=n * p * d_h,
                          wall_time=time.perf_counter() - start,
                          extras={"final_bank": bank})
