"""Eligibility propagation: implicit traces, e-prop and its m-order family.

The implicit variable eps^t_{ij} accumulates the influence of w_ij on
h^t_j through the implicit recurrence only:

    eps^t_{ij} = D^t_j eps^{t-1}_{ij} + G^t_{ij},   e^t_{ij} = psi^t_j eps^t_{ij}

e-prop approximates the gradient as sum_t dL/do^t_j (partial) e^t_{ij},
dropping every explicit-recurrence path.  The m-order family restores the
dropped paths up to m-1 synaptic jumps via the aggregated trace bank
B_r^{t,k}_{ij}: the sum of path traces over all neuron paths with exactly
r explicit jumps ending at the synapse's target j.  m = 1 is e-prop;
m = T is the exact gradient.
"""

import time
from dataclasses import dataclass

import numpy as np

from .report import GradientReport


@dataclass(frozen=True)
class ImplicitTrace:
    """Per-synapse implicit state: eps (p, d_h) and eligibility e (p,)."""

    eps: np.ndarray
    e: np.ndarray


def zero_implicit_trace(spec):
    return ImplicitTrace(eps=np.zeros((spec.p, spec.d_h)),
                         e=np.zeros(spec.p))


def implicit_trace_step(trace, jac, t, spec):
    """Advance eps and e from step t-1 to step t."""
    tgt = spec.targets
    eps = np.einsum("pab,pb->pa", jac.D[t, tgt], trace.eps) + jac.G[t]
    e = np.einsum("pa,pa->p", jac.psi[t, tgt], eps)
    return ImplicitTrace(eps=eps, e=e)


def eprop_gradient(spec, traj, jac, loss_partials):
    """Symmetric e-prop: dL/dw_ij ~ sum_t dL/do^t_j (partial) e^t_{ij}.

    loss_partials is a (T+1, n) array of partial derivatives through the
    readout only (row 0 unused).  Returns per-step contributions C^t.
    """
    start = time.perf_counter()
    T, p, d_h = traj.T, spec.p, spec.d_h
    tgt = spec.targets
    trace = zero_implicit_trace(spec)
    per_step = np.zeros((T + 1, p))
    grad = np.zeros(p)
    flops = 0
    for t in range(1, T + 1):
        trace = implicit_trace_step(trace, jac, t, spec)
        per_step[t] = loss_partials[t][tgt] * trace.e
        grad += per_step[t]
        flops += p * (d_h * d_h + d_h + 1)
    return GradientReport(gradient=grad, per_step=per_step, flops=flops,
                          trace_floats=p * (d_h + 1),
                          wall_time=time.perf_counter() - start,
                          extras={"final_trace": trace})


def zero_order_bank(spec, m):
    """Bank B (m, n, p, d_h); B[r, k, s] sums traces over all neuron paths
    of exactly r explicit jumps from k back to the target of synapse s."""
    return np.zeros((m, spec.n, spec.p, spec.d_h))


def order_trace_step(bank, trace_prev, jac, t, spec, eps_t=None):
    """Advance the aggregated order bank from step t-1 to step t.

    trace_prev holds the step t-1 implicit trace; eps_t, when given, is the
    already-stepped step-t implicit variable used to refresh the order-0
    slice (recomputed otherwise).

    B_r^{t,k} = D^t_k B_r^{t-1,k}
                + sum_k' E^{t-1}[k][k'] (psi^{t-1}_k' . B_{r-1}^{t-1,k'})
    with B_0^{t,j} = eps^t_{ij} injected at k = j.
    """
    tgt = spec.targets
    if eps_t is None:
        eps_t = implicit_trace_step(trace_prev, jac, t, spec).eps
    new = np.einsum("kab,rkpb->rkpa", jac.D[t], bank)
    if bank.shape[0] > 1:
        # scalar suffix traces psi^{t-1}_k' . B^{t-1}_{r-1,k'} per (r-1, k', p)
        s_prev = np.einsum("kb,rkpb->rkp", jac.psi[t - 1], bank[:-1])
        new[1:] += np.einsum("kqa,rqp->rkpa", jac.E[t - 1], s_prev)
    new[0] = 0.0
    new[0, tgt, np.arange(spec.p), :] = eps_t
    return new


def m_order_gradient(spec, traj, jac, loss_partials, m, record_bank=False):
    """m-order e-prop: keep explicit-recurrence orders 0..m-1.

    dL/dw_ij = sum_t sum_{r<m} sum_k dL/do^t_k (partial) psi^t_k B_r^{t,k}.
    m = 1 reproduces eprop_gradient; m = T the exact gradient.
    """
    T, p, d_h, n = traj.T, spec.p, spec.d_h, spec.n
    if not 1 <= m <= T:
        raise ValueError(f"order m={m} outside 1..T={T}")
    start = time.perf_counter()
    tgt = spec.targets
    trace = zero_implicit_trace(spec)
    bank = zero_order_bank(spec, m)
    grad = np.zeros(p)
    per_step = np.zeros((T + 1, p))
    history = [] if record_bank else None
    n_E = jac.nonzero_E_pairs()
    flops = 0
    for t in range(1, T + 1):
        new_trace = implicit_trace_step(trace, jac, t, spec)
        bank = order_trace_step(bank, trace, jac, t, spec, eps_t=new_trace.eps)
        trace = new_trace
        if record_bank:
            history.append(bank.copy())
        c_t = np.zeros(p)
        for r in range(m):
            e_r = np.einsum("kb,kpb->kp", jac.psi[t], bank[r])
            c_t += loss_partials[t] @ e_r
        per_step[t] = c_t
        grad += c_t
        flops += (p * (d_h * d_h + d_h)            # implicit trace
                  + m * n * p * d_h * d_h          # D propagation
                  + (m - 1) * n * p * d_h          # suffix scalars
                  + (m - 1) * n_E * p * d_h        # explicit jumps
                  + m * n * p * (d_h + 1))         # contraction with loss
    return GradientReport(gradient=grad, per_step=per_step, flops=flops,
                          trace_floats=m * n * p * d_h + p * (d_h + 1),
                          wall_time=time.perf_counter() - start,
                          extras={"bank_history": history})
