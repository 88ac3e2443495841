"""Interchangeable gradient engines for recurrent networks.

One network model (leaky-tanh, LIF or adaptive-threshold LIF cells), four
gradient computations over it -- backward unrolling (BPTT), forward
recurrence propagation (RTRL), eligibility propagation (e-prop) and the
order-truncated family bridging the two -- plus brute-force oracles and a
verification harness for all their equivalence and approximation claims.
"""

from .bptt import AdjointState, backward_hidden_adjoints, \
    backward_output_adjoints, bptt_gradient
from .eprop import (ImplicitTrace, eprop_gradient, implicit_trace_step,
                    m_order_gradient, order_trace_step, zero_implicit_trace,
                    zero_order_bank)
from .model import (ALIF, LIF, LeakyTanh, LocalJacobians, NetworkSpec,
                    SimulationDivergence, Trajectory, local_jacobians,
                    simulate)
from .readout import (ReadoutSpec, eprop_readout_gradient, low_pass_filter,
                      lsnn_gradient, readout_forward, readout_trace_step,
                      static_loss_partials, total_loss_partials)
from .report import GradientReport
from .rtrl import rtrl_gradient, rtrl_step, zero_recurrence_bank

__all__ = [
    "ALIF", "AdjointState", "GradientReport", "ImplicitTrace", "LIF",
    "LeakyTanh", "LocalJacobians", "NetworkSpec", "ReadoutSpec",
    "SimulationDivergence", "Trajectory", "backward_hidden_adjoints",
    "backward_output_adjoints", "bptt_gradient", "eprop_gradient",
    "eprop_readout_gradient", "implicit_trace_step", "local_jacobians",
    "low_pass_filter", "lsnn_gradient", "m_order_gradient",
    "order_trace_step", "readout_forward", "readout_trace_step",
    "rtrl_gradient", "rtrl_step", "simulate", "static_loss_partials",
    "total_loss_partials", "zero_implicit_trace", "zero_order_bank",
    "zero_recurrence_bank",
]

__version__ = "0.1.0"
