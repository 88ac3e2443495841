"""Network model: cell dynamics, forward simulation and local Jacobians.

The network class: each neuron j carries a hidden vector h^t_j that depends
on its own previous hidden vector (implicit recurrence) and on the previous
outputs o^{t-1}_i of its presynaptic nodes through weights w_ij (explicit
recurrence).  External inputs are presented as outputs of virtual input
nodes, so input synapses and recurrent synapses share one Jacobian family.

Node indexing convention: sources 0 .. input_dim-1 are input nodes, sources
input_dim .. input_dim+n-1 are neurons.  Synapses are stored as a flat list
(input synapses first, then recurrent ones); every gradient array in the
package is aligned with that list.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np


class SimulationDivergence(RuntimeError):
    """Raised when a state value becomes non-finite during simulation."""

    def __init__(self, t, j):
        super().__init__(f"non-finite state at step t={t}, neuron j={j}")
        self.t = t
        self.j = j


# ---------------------------------------------------------------------------
# cells


@dataclass(frozen=True)
class LeakyTanh:
    """Leaky accumulator with tanh output, the smooth reference cell.

    v^t_j = a_j v^{t-1}_j + sum_i w_ij o^{t-1}_i,   o^t_j = tanh(v^t_j).

    With linear_output=True the output is o = v, which makes the worked
    micro-examples hand-computable.
    """

    leak: float | tuple = 0.5
    linear_output: bool = False

    d_h = 1
    spiking = False

    def __post_init__(self):
        # zero leak (memoryless hidden state) is allowed; the worked
        # micro-cases rely on it
        a = np.atleast_1d(np.asarray(self.leak, dtype=float))
        if np.any(a < 0.0) or np.any(a >= 1.0):
            raise ValueError("leak must lie in [0, 1)")

    def leak_vector(self, n):
        return np.broadcast_to(np.asarray(self.leak, dtype=float), (n,)).copy()


@dataclass(frozen=True)
class LIF:
    """Leaky integrate-and-fire neuron with soft reset and surrogate slope.

    v^t_j = alpha v^{t-1}_j + sum_i w_ij o^{t-1}_i - reset v_th o^{t-1}_j
    o^t_j = step(v^t_j - v_th)        (spike at v >= v_th)

    The reset term is routed through the self-explicit Jacobian E[j][j],
    not through the implicit D, so every engine treats it identically.
    Surrogate derivative: psi = gamma_pd * max(0, 1 - |v - v_th| / v_th).
    """

    leak: float = 0.9
    v_th: float = 1.0
    gamma_pd: float = 0.3
    reset: float = 1.0

    d_h = 1
    spiking = True

    def __post_init__(self):
        if not 0.0 < self.leak < 1.0:
            raise ValueError("leak must lie strictly inside (0, 1)")
        if self.v_th <= 0.0 or self.gamma_pd <= 0.0:
            raise ValueError("v_th and gamma_pd must be positive")


@dataclass(frozen=True)
class ALIF:
    """LIF with an adaptive threshold; hidden state is (v, b), d_h = 2.

    b^t_j = rho b^{t-1}_j + o^{t-1}_j, effective threshold v_th + beta_a b^t.
    Both o^{t-1}_j contributions (reset into v, spike into b) enter through
    the self-explicit Jacobian; D = diag(alpha, rho).
    """

    leak: float = 0.9
    v_th: float = 1.0
    gamma_pd: float = 0.3
    reset: float = 1.0
    rho: float = 0.95
    beta_a: float = 0.5

    d_h = 2
    spiking = True

    def __post_init__(self):
        for name in ("leak", "rho"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1)")
        if self.v_th <= 0.0 or self.gamma_pd <= 0.0:
            raise ValueError("v_th and gamma_pd must be positive")
        if self.beta_a < 0.0:
            raise ValueError("beta_a must be >= 0")


CELL_NAMES = {"leaky_tanh": LeakyTanh, "lif": LIF, "alif": ALIF}


# ---------------------------------------------------------------------------
# network spec


@dataclass(frozen=True)
class NetworkSpec:
    """Static description of one network whose weight gradients we compute.

    synapses: tuple of (source_node, target_neuron) pairs, source_node in
    0..input_dim+n-1 (inputs first).  weights aligns with synapses.
    """

    n: int
    input_dim: int
    cell: LeakyTanh | LIF | ALIF
    synapses: tuple
    weights: np.ndarray
    readout: object = None
    seed: int = 0

    def __post_init__(self):
        if len(set(self.synapses)) != len(self.synapses):
            raise ValueError("duplicate (i, j) synapse")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.synapses),):
            raise ValueError("weights must align with synapses")
        object.__setattr__(self, "weights", w)
        for i, j in self.synapses:
            if not 0 <= i < self.input_dim + self.n:
                raise ValueError(f"bad source node {i}")
            if not 0 <= j < self.n:
                raise ValueError(f"bad target neuron {j}")

    @property
    def p(self):
        return len(self.synapses)

    @property
    def d_h(self):
        return self.cell.d_h

    @property
    def sources(self):
        return np.array([i for i, _ in self.synapses], dtype=int)

    @property
    def targets(self):
        return np.array([j for _, j in self.synapses], dtype=int)

    @property
    def recurrent_mask(self):
        """True for neuron-to-neuron synapses."""
        return self.sources >= self.input_dim

    @property
    def self_synapses(self):
        """Synapse indices with source neuron == target neuron (explicit)."""
        return np.flatnonzero(
            (self.sources - self.input_dim) == self.targets
        )

    def weight_matrix(self):
        """Dense (input_dim + n, n) matrix of all synapse weights."""
        W = np.zeros((self.input_dim + self.n, self.n))
        for s, (i, j) in enumerate(self.synapses):
            W[i, j] = self.weights[s]
        return W

    def recurrent_matrix(self):
        """Dense (n, n) matrix W[j, k] of neuron-to-neuron weights."""
        return self.weight_matrix()[self.input_dim:, :]

    def with_weights(self, weights):
        return NetworkSpec(self.n, self.input_dim, self.cell, self.synapses,
                           np.asarray(weights, dtype=float), self.readout,
                           self.seed)

    def synapse_index(self, i, j):
        """Flat index of synapse (i, j); raises KeyError if absent."""
        try:
            return self.synapses.index((i, j))
        except ValueError:
            raise KeyError(f"no synapse ({i}, {j})") from None

    # -- serialization ------------------------------------------------------

    def to_json(self):
        cell_name = {LeakyTanh: "leaky_tanh", LIF: "lif", ALIF: "alif"}[type(self.cell)]
        params = {
            k: (list(v) if isinstance(v, (tuple, list, np.ndarray)) else v)
            for k, v in vars(self.cell).items()
        }
        syn = []
        inp = []
        for s, (i, j) in enumerate(self.synapses):
            w = float(self.weights[s])
            if i < self.input_dim:
                inp.append([i, j, w])
            else:
                syn.append([i - self.input_dim, j, w])
        doc = {
            "n": self.n,
            "cell": cell_name,
            "params": dict(params, input_dim=self.input_dim),
            "synapses": syn,
            "input_weights": inp,
            "readout": self.readout.to_json() if self.readout is not None else None,
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2)

    @staticmethod
    def from_json(text):
        from .readout import ReadoutSpec

        doc = json.loads(text)
        params = dict(doc["params"])
        input_dim = int(params.pop("input_dim", 0))
        if "leak" in params and isinstance(params["leak"], list):
            params["leak"] = tuple(params["leak"])
        cell = CELL_NAMES[doc["cell"]](**params)
        synapses = []
        weights = []
        for i, j, w in doc["input_weights"]:
            synapses.append((int(i), int(j)))
            weights.append(w)
        for i, j, w in doc["synapses"]:
            synapses.append((int(i) + input_dim, int(j)))
            weights.append(w)
        readout = None
        if doc.get("readout") is not None:
            readout = ReadoutSpec.from_json(doc["readout"])
        return NetworkSpec(int(doc["n"]), input_dim, cell, tuple(synapses),
                           np.asarray(weights, dtype=float), readout,
                           int(doc.get("seed", 0)))


# ---------------------------------------------------------------------------
# trajectory


@dataclass(frozen=True)
class Trajectory:
    """Recorded forward run: h (T+1, n, d_h), o (T+1, n), inputs (T, d_in).

    Row 0 holds the zero initial state; inputs[t] is the output of the
    virtual input nodes at step t, consumed by the neurons at step t+1.
    """

    T: int
    h: np.ndarray
    o: np.ndarray
    inputs: np.ndarray

    def node_outputs(self, t):
        """Outputs of all source nodes at step t (inputs then neurons)."""
        if t < self.inputs.shape[0]:
            x = self.inputs[t]
        else:
            x = np.zeros(self.inputs.shape[1])
        return np.concatenate([x, self.o[t]])

    def to_csv(self, path):
        """Columns: t, neuron, h_0, h_1, o (h_1 is 0.0 for scalar cells)."""
        d_h = self.h.shape[2]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "neuron", "h_0", "h_1", "o"])
            for t in range(self.T + 1):
                for j in range(self.h.shape[1]):
                    h1 = self.h[t, j, 1] if d_h > 1 else 0.0
                    writer.writerow([t, j, repr(float(self.h[t, j, 0])),
                                     repr(float(h1)),
                                     repr(float(self.o[t, j]))])


# ---------------------------------------------------------------------------
# dynamics


def step_dynamics(cell, n, h_prev, o_prev, drive):
    """One synchronous update of all neurons.

    h_prev: (n, d_h), o_prev: (n,), drive: (n,) summed weighted inputs.
    Returns (h, o) for the new step.
    """
    if isinstance(cell, LeakyTanh):
        v = cell.leak_vector(n) * h_prev[:, 0] + drive
        o = v.copy() if cell.linear_output else np.tanh(v)
        return v[:, None], o
    if isinstance(cell, LIF):
        v = cell.leak * h_prev[:, 0] + drive - cell.reset * cell.v_th * o_prev
        o = (v >= cell.v_th).astype(float)
        return v[:, None], o
    if isinstance(cell, ALIF):
        v = cell.leak * h_prev[:, 0] + drive - cell.reset * cell.v_th * o_prev
        b = cell.rho * h_prev[:, 1] + o_prev
        o = (v >= cell.v_th + cell.beta_a * b).astype(float)
        return np.stack([v, b], axis=1), o
    raise TypeError(f"unknown cell {cell!r}")


def output_map(cell, n, h):
    """o as a function of h alone (smooth cells only; used by FD checks)."""
    if isinstance(cell, LeakyTanh):
        v = h[:, 0]
        return v.copy() if cell.linear_output else np.tanh(v)
    raise TypeError("output_map is only defined for smooth cells")


def simulate(spec, inputs, T):
    """Run the dynamics for T steps from the zero state.

    inputs must provide at least T rows of shape (input_dim,).  Raises
    SimulationDivergence on the first non-finite state value.
    """
    x = np.asarray(inputs, dtype=float).reshape(-1, spec.input_dim)
    if x.shape[0] < T:
        raise ValueError(f"need >= {T} input steps, got {x.shape[0]}")
    x = x[:T]
    n, d_h = spec.n, spec.d_h
    h = np.zeros((T + 1, n, d_h))
    o = np.zeros((T + 1, n))
    W = spec.weight_matrix()
    for t in range(1, T + 1):
        prev = np.concatenate([x[t - 1], o[t - 1]])
        drive = prev @ W
        h[t], o[t] = step_dynamics(spec.cell, n, h[t - 1], o[t - 1], drive)
        if not np.all(np.isfinite(h[t])):
            j = int(np.argwhere(~np.isfinite(h[t]))[0][0])
            raise SimulationDivergence(t, j)
    return Trajectory(T=T, h=h, o=o, inputs=x)


# ---------------------------------------------------------------------------
# local Jacobians


@dataclass(frozen=True)
class LocalJacobians:
    """The four single-step Jacobian families every engine consumes.

    D[t, j]    (d_h, d_h)  dh^t_j / dh^{t-1}_j          valid t = 1..T
    psi[t, j]  (d_h,)      do^t_j / dh^t_j (surrogate)   valid t = 1..T
    E[t, k, j] (d_h,)      dh^{t+1}_k / do^t_j           valid t = 0..T-1
    G[t, s]    (d_h,)      dh^t_{tgt(s)} / dw_s          valid t = 1..T

    E and G sparsity mirrors connectivity exactly, except for the spiking
    reset/adaptation terms which occupy the diagonal E[t, j, j].
    """

    D: np.ndarray
    psi: np.ndarray
    E: np.ndarray
    G: np.ndarray

    def nonzero_E_pairs(self):
        """Number of structurally nonzero (k, j) columns of E."""
        return int(np.count_nonzero(np.any(self.E[0] != 0.0, axis=2)))


def surrogate_slope(cell, v, threshold):
    """Triangular surrogate: gamma_pd * max(0, 1 - |v - thr| / v_th)."""
    return cell.gamma_pd * np.maximum(0.0, 1.0 - np.abs(v - threshold) / cell.v_th)


def local_jacobians(spec, traj):
    """All four Jacobian families along a recorded trajectory."""
    n, d_h, T, p = spec.n, spec.d_h, traj.T, spec.p
    cell = spec.cell
    D = np.zeros((T + 1, n, d_h, d_h))
    psi = np.zeros((T + 1, n, d_h))
    E = np.zeros((T + 1, n, n, d_h))
    G = np.zeros((T + 1, p, d_h))

    W_rec = spec.recurrent_matrix()
    # E is state-independent for all built-in cells: weights plus the
    # spiking self terms.  E[t, k, j, :] = dh^{t+1}_k / do^t_j.
    E0 = np.zeros((n, n, d_h))
    E0[:, :, 0] = W_rec.T
    if isinstance(cell, (LIF, ALIF)):
        idx = np.arange(n)
        E0[idx, idx, 0] -= cell.reset * cell.v_th
        if isinstance(cell, ALIF):
            E0[idx, idx, 1] += 1.0
    E[:] = E0

    if isinstance(cell, LeakyTanh):
        a = cell.leak_vector(n)
        D[1:, :, 0, 0] = a
        if cell.linear_output:
            psi[1:, :, 0] = 1.0
        else:
            psi[1:, :, 0] = 1.0 - traj.o[1:] ** 2
    elif isinstance(cell, LIF):
        D[1:, :, 0, 0] = cell.leak
        psi[1:, :, 0] = surrogate_slope(cell, traj.h[1:, :, 0], cell.v_th)
    elif isinstance(cell, ALIF):
        D[1:, :, 0, 0] = cell.leak
        D[1:, :, 1, 1] = cell.rho
        thr = cell.v_th + cell.beta_a * traj.h[1:, :, 1]
        pd = surrogate_slope(cell, traj.h[1:, :, 0], thr)
        psi[1:, :, 0] = pd
        psi[1:, :, 1] = -cell.beta_a * pd
    else:
        raise TypeError(f"unknown cell {cell!r}")

    src = spec.sources
    for t in range(1, T + 1):
        G[t, :, 0] = traj.node_outputs(t - 1)[src]
    return LocalJacobians(D=D, psi=psi, E=E, G=G)
