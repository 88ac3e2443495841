"""Readout networks, loss partials and the readout-side eligibility traces.

Two readout kinds over the neuron outputs o^t_j:

  static:  y^t_k = sum_j w_out[j, k] o^t_j + b_k
  leaky:   y^t_k = kappa y^{t-1}_k + sum_j w_out[j, k] o^t_j + b_k

The built-in loss is squared error  L = 1/2 sum_{t,k} (y^t_k - y*^t_k)^2,
but every entry point also accepts an externally supplied dL/dy series so
other losses plug in without new code paths.
"""

import csv
import time
from dataclasses import dataclass

import numpy as np

from .report import GradientReport

STATIC = "static"
LEAKY = "leaky"


@dataclass(frozen=True)
class ReadoutSpec:
    """Readout description: kind, weights (n, K), biases (K,), leak kappa."""

    kind: str
    w_out: np.ndarray
    b_out: np.ndarray
    kappa: float = 0.0
    targets: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (STATIC, LEAKY):
            raise ValueError(f"unknown readout kind {self.kind!r}")
        object.__setattr__(self, "w_out", np.asarray(self.w_out, dtype=float))
        object.__setattr__(self, "b_out", np.asarray(self.b_out, dtype=float))
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError("kappa must lie in [0, 1)")
        if self.targets is not None:
            object.__setattr__(self, "targets",
                               np.asarray(self.targets, dtype=float))

    @property
    def K(self):
        return self.w_out.shape[1]

    def to_json(self):
        return {
            "kind": self.kind,
            "w_out": self.w_out.tolist(),
            "b_out": self.b_out.tolist(),
            "kappa": self.kappa,
        }

    @staticmethod
    def from_json(doc):
        return ReadoutSpec(kind=doc["kind"],
                           w_out=np.asarray(doc["w_out"], dtype=float),
                           b_out=np.asarray(doc["b_out"], dtype=float),
                           kappa=float(doc.get("kappa", 0.0)))


def load_targets_csv(path, T, K):
    """Read a target series from CSV with columns t, k, value."""
    y_star = np.zeros((T + 1, K))
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            y_star[int(row["t"]), int(row["k"])] = float(row["value"])
    return y_star


def _resolve_targets(rspec, T, targets):
    if targets is None:
        targets = rspec.targets
    if targets is None:
        raise ValueError("no target series supplied")
    targets = np.asarray(targets, dtype=float)
    if targets.shape == (T, rspec.K):          # rows for t = 1..T
        targets = np.vstack([np.zeros((1, rspec.K)), targets])
    if targets.shape != (T + 1, rspec.K):
        raise ValueError(f"targets shape {targets.shape} does not match "
                         f"(T+1, K) = {(T + 1, rspec.K)}")
    return targets


def readout_forward(rspec, traj, targets=None):
    """Readout series y (T+1, K) and the squared-error loss value."""
    T = traj.T
    y = np.zeros((T + 1, rspec.K))
    for t in range(1, T + 1):
        y[t] = traj.o[t] @ rspec.w_out + rspec.b_out
        if rspec.kind == LEAKY:
            y[t] += rspec.kappa * y[t - 1]
    y_star = _resolve_targets(rspec, T, targets)
    loss = 0.5 * float(np.sum((y[1:] - y_star[1:]) ** 2))
    return y, loss


def loss_partials_y(rspec, y, targets=None):
    """dL/dy^t_k for squared error: y - y* (rows 1..T)."""
    y_star = _resolve_targets(rspec, y.shape[0] - 1, targets)
    dLdy = y - y_star
    dLdy[0] = 0.0
    return dLdy


def static_loss_partials(rspec, y, targets=None, dLdy=None):
    """dL/do^t_j through a static readout: sum_k dL/dy^t_k w_out[j, k].

    This partial is complete only for the static kind; for a leaky readout
    use total_loss_partials (exact engines) or the readout-trace path.
    """
    if rspec.kind != STATIC:
        raise ValueError("static_loss_partials requires a static readout")
    if dLdy is None:
        dLdy = loss_partials_y(rspec, y, targets)
    return dLdy @ rspec.w_out.T


def total_loss_partials(rspec, y, targets=None, dLdy=None):
    """dL/do^t_j through the readout only, exact for both kinds.

    For the leaky kind this resolves the readout's implicit recurrence by a
    backward pass, so it is non-causal; it is what BPTT/RTRL need to be
    exact through a recurrent readout.
    """
    if dLdy is None:
        dLdy = loss_partials_y(rspec, y, targets)
    if rspec.kind == STATIC:
        return dLdy @ rspec.w_out.T
    T = y.shape[0] - 1
    acc = np.zeros_like(dLdy)
    for t in range(T, 0, -1):
        acc[t] = dLdy[t]
        if t < T:
            acc[t] += rspec.kappa * acc[t + 1]
    return acc @ rspec.w_out.T


def low_pass_filter(x, alpha):
    """First-order recursive filter F(x^t) = alpha F(x^{t-1}) + x^t.

    Filters along axis 0 with F(x^0) = x^0.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[0] = x[0]
    for t in range(1, x.shape[0]):
        out[t] = alpha * out[t - 1] + x[t]
    return out


def readout_trace_step(gamma, rspec, e_t, targets_of_synapse):
    """One update of the readout trace gamma (K, p).

    gamma^{t,k}_{ij} = kappa gamma^{t-1,k}_{ij} + w_out[j, k] e^t_{ij}.
    """
    return rspec.kappa * gamma + rspec.w_out[targets_of_synapse, :].T * e_t[None, :]


def eprop_readout_gradient(spec, traj, jac, targets=None, dLdy=None):
    """e-prop through a leaky readout via the readout trace gamma.

    dL/dw_ij ~ sum_{k,t} dL/dy^t_k gamma^{t,k}_{ij}.
    """
    rspec = spec.readout
    if rspec is None or rspec.kind != LEAKY:
        raise ValueError("eprop_readout_gradient requires a leaky readout")
    from .eprop import implicit_trace_step, zero_implicit_trace

    start = time.perf_counter()
    y, _ = readout_forward(rspec, traj, targets)
    if dLdy is None:
        dLdy = loss_partials_y(rspec, y, targets)
    T, p, d_h, K = traj.T, spec.p, spec.d_h, rspec.K
    tgt = spec.targets
    trace = zero_implicit_trace(spec)
    gamma = np.zeros((K, p))
    grad = np.zeros(p)
    flops = 0
    for t in range(1, T + 1):
        trace = implicit_trace_step(trace, jac, t, spec)
        gamma = readout_trace_step(gamma, rspec, trace.e, tgt)
        grad += dLdy[t] @ gamma
        flops += p * (d_h * d_h + d_h) + 2 * K * p + K * p
    return GradientReport(gradient=grad, per_step=None, flops=flops,
                          trace_floats=p * (d_h + 1) + K * p,
                          wall_time=time.perf_counter() - start,
                          extras={"y": y})


def lsnn_gradient(spec, traj, jac, targets=None, dLdy=None):
    """Learning-signal form: dL/dw_ij ~ sum_t L^t_j F_kappa(e^t_{ij}).

    Algebraically identical to eprop_readout_gradient via the identity
    gamma^{t,k}_{ij} = w_out[j, k] F_kappa(e^t_{ij}).
    """
    rspec = spec.readout
    if rspec is None or rspec.kind != LEAKY:
        raise ValueError("lsnn_gradient requires a leaky readout")
    from .eprop import implicit_trace_step, zero_implicit_trace

    start = time.perf_counter()
    y, _ = readout_forward(rspec, traj, targets)
    if dLdy is None:
        dLdy = loss_partials_y(rspec, y, targets)
    T, p, d_h = traj.T, spec.p, spec.d_h
    tgt = spec.targets
    trace = zero_implicit_trace(spec)
    filt = np.zeros(p)
    grad = np.zeros(p)
    signals = np.zeros((T + 1, spec.n))
    flops = 0
    for t in range(1, T + 1):
        trace = implicit_trace_step(trace, jac, t, spec)
        filt = rspec.kappa * filt + trace.e
        signals[t] = rspec.w_out @ dLdy[t]
        grad += signals[t][tgt] * filt
        flops += p * (d_h * d_h + d_h) + 2 * p + spec.n * rspec.K
    return GradientReport(gradient=grad, per_step=None, flops=flops,
                          trace_floats=p * (d_h + 1) + p,
                          wall_time=time.perf_counter() - start,
                          extras={"learning_signals": signals, "y": y})
