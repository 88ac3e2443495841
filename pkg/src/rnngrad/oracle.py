"""Brute-force oracles: definitional path sums and finite differences.

Every incremental recursion in the package has a definitional counterpart
here, evaluated by explicit enumeration with products formed in the exact
factor order of the defining sums.  These run only at desk scale; the
exhaustive path enumeration refuses instances beyond a configurable cap.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .model import simulate
from .readout import loss_partials_y, readout_forward


class PathBlowup(RuntimeError):
    """Raised when exhaustive path enumeration would exceed the cap."""


@dataclass(frozen=True)
class PathTerm:
    """One enumerated path contribution: synapse, neuron path, anchor times
    and the accumulated d_h product value."""

    synapse: tuple
    path: tuple
    t_start: int
    t_end: int
    value: np.ndarray


def fd_gradient(spec, inputs, T, step=1e-5, targets=None):
    """Central finite differences of the full readout loss per synapse.

    Smooth cells only; each probe re-simulates the network.
    """
    if spec.cell.spiking:
        raise ValueError("finite differences are invalid for spiking cells")
    if step <= 0.0:
        raise ValueError("step must be positive")
    if spec.readout is None:
        raise ValueError("fd_gradient needs a readout to define the loss")

    def loss_at(weights):
        traj = simulate(spec.with_weights(weights), inputs, T)
        _, loss = readout_forward(spec.readout, traj, targets)
        return loss

    grad = np.zeros(spec.p)
    for s in range(spec.p):
        w_plus = spec.weights.copy()
        w_minus = spec.weights.copy()
        w_plus[s] += step
        w_minus[s] -= step
        grad[s] = (loss_at(w_plus) - loss_at(w_minus)) / (2.0 * step)
    return grad


def _d_chain(jac, j, t_hi, t_lo, vec):
    """D[t_hi][j] ... D[t_lo][j] . vec, multiplied right to left."""
    out = vec
    for u in range(t_lo, t_hi + 1):
        out = jac.D[u, j] @ out
    return out


def implicit_variable_definitional(traj, jac, spec, i, j, t):
    """eps^t_{ij} as the definitional sum over start times t' <= t."""
    s = spec.synapse_index(i, j)
    total = np.zeros(spec.d_h)
    for t_prime in range(1, t + 1):
        total += _d_chain(jac, j, t, t_prime + 1, jac.G[t_prime, s])
    return total


def explicit_variable_definitional(traj, jac, spec, i, j, path, t):
    """Path-indexed explicit variable beta^t_{ij}(path) by recursion.

    path is the neuron sequence (k, k', ..., j) ending at the synapse's
    target; path == (j,) is the base case beta^t(j) = eps^t_{ij}.
    """
    path = tuple(path)
    if path[-1] != j:
        raise ValueError("path must end at the synapse target")
    if len(path) == 1:
        return implicit_variable_definitional(traj, jac, spec, i, j, t)
    k, k_next = path[0], path[1]
    total = np.zeros(spec.d_h)
    for t_prime in range(1, t):
        suffix = explicit_variable_definitional(traj, jac, spec, i, j,
                                                path[1:], t_prime)
        scalar = float(jac.psi[t_prime, k_next] @ suffix)
        term = jac.E[t_prime, k, k_next] * scalar
        total += _d_chain(jac, k, t, t_prime + 2, term)
    return total


def recurrence_variable_definitional(traj, jac, spec, i, j, r, t,
                                     max_paths=200_000):
    """alpha^{t,r}_{ij}: sum of beta^t over all neuron paths from r to j.

    Enumerates every path length 0..t-1 and every intermediate neuron
    tuple; refuses (PathBlowup) when the enumeration exceeds max_paths.
    """
    n = spec.n
    count = sum(n ** max(0, length - 1) for length in range(t))
    if count > max_paths:
        raise PathBlowup(f"{count} paths exceed cap {max_paths}")
    total = np.zeros(spec.d_h)
    for length in range(t):          # number of explicit jumps
        if length == 0:
            if r == j:
                total += implicit_variable_definitional(traj, jac, spec, i, j, t)
            continue
        for mids in itertools.product(range(n), repeat=length - 1):
            path = (r,) + mids + (j,)
            total += explicit_variable_definitional(traj, jac, spec, i, j,
                                                    path, t)
    return total


def readout_variable_definitional(rspec, e_series, k, tgt_j_weight_row, t):
    """gamma^{t,k}_{ij} as the definitional filtered sum.

    e_series is the (T+1,) eligibility series of one synapse;
    tgt_j_weight_row is w_out[j, :] for the synapse's target neuron j.
    """
    total = 0.0
    for t_prime in range(1, t + 1):
        total += rspec.kappa ** (t - t_prime) * tgt_j_weight_row[k] * e_series[t_prime]
    return total


def fd_loss_partial(spec, inputs, T, t, j, step=1e-6, targets=None):
    """Finite-difference check of dL/do^t_j by injecting a perturbation of
    one neuron output at one step (readout path only)."""
    if spec.readout is None:
        raise ValueError("needs a readout to define the loss")
    traj = simulate(spec, inputs, T)

    def loss_with_offset(delta):
        o = traj.o.copy()
        o[t, j] += delta
        perturbed = type(traj)(T=traj.T, h=traj.h, o=o, inputs=traj.inputs)
        _, loss = readout_forward(spec.readout, perturbed, targets)
        return loss

    return (loss_with_offset(step) - loss_with_offset(-step)) / (2.0 * step)
