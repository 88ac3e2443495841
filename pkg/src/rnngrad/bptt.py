"""Exact gradient by backward recursion over the unrolled graph (BPTT)."""

import time
from dataclasses import dataclass

import numpy as np

from .report import GradientReport


@dataclass(frozen=True)
class AdjointState:
    """Total derivatives dL/do^t_j (T+1, n) and dL/dh^t_j (T+1, n, d_h).

    Rows 1..T are meaningful; boundary values beyond T are zero.
    """

    dLdo: np.ndarray
    dLdh: np.ndarray


def _backward(traj, jac, loss_partials):
    """Joint backward recursion for both adjoint families.

    dLdo^t_j = dL/do^t_j (partial) + sum_k dLdh^{t+1}_k . E^t[k][j]
    dLdh^t_j = dLdo^t_j psi^t_j + dLdh^{t+1}_j . D^{t+1}_j
    """
    T = traj.T
    n, d_h = jac.psi.shape[1], jac.psi.shape[2]
    dLdo = np.zeros((T + 1, n))
    dLdh = np.zeros((T + 2, n, d_h))
    for t in range(T, 0, -1):
        dLdo[t] = loss_partials[t] + np.einsum("kja,ka->j", jac.E[t], dLdh[t + 1])
        dLdh[t] = dLdo[t][:, None] * jac.psi[t]
        if t < T:
            dLdh[t] += np.einsum("jb,jba->ja", dLdh[t + 1], jac.D[t + 1])
    return AdjointState(dLdo=dLdo, dLdh=dLdh[: T + 1])


def backward_output_adjoints(traj, jac, loss_partials):
    """Total derivatives dL/do^t_j for all t, j (computed jointly with the
    hidden adjoints, which the output recursion depends on)."""
    return _backward(traj, jac, loss_partials).dLdo


def backward_hidden_adjoints(traj, jac, dLdo):
    """Total derivatives dL/dh^t_j from already-computed output adjoints."""
    T = traj.T
    n, d_h = jac.psi.shape[1], jac.psi.shape[2]
    dLdh = np.zeros((T + 2, n, d_h))
    for t in range(T, 0, -1):
        dLdh[t] = dLdo[t][:, None] * jac.psi[t]
        if t < T:
            dLdh[t] += np.einsum("jb,jba->ja", dLdh[t + 1], jac.D[t + 1])
    return dLdh[: T + 1]


def bptt_gradient(spec, traj, jac, loss_partials):
    """dL/dw_ij = sum_t dLdh^t_j . G^t_{ij}; adjoints returned in extras."""
    start = time.perf_counter()
    T, p, n, d_h = traj.T, spec.p, spec.n, spec.d_h
    adj = _backward(traj, jac, loss_partials)
    tgt = spec.targets
    grad = np.zeros(p)
    for t in range(1, T + 1):
        grad += np.einsum("pa,pa->p", adj.dLdh[t, tgt], jac.G[t])
    n_E = jac.nonzero_E_pairs()
    flops = T * (n_E * d_h + n * (d_h + d_h * d_h) + p * d_h)
    return GradientReport(gradient=grad, per_step=None, flops=flops,
                          trace_floats=n * T * (d_h + 1),
                          wall_time=time.perf_counter() - start,
                          extras={"adjoints": adj})
