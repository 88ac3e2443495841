"""Result container shared by all gradient engines."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class GradientReport:
    """Gradient of the loss w.r.t. every synapse plus bookkeeping.

    gradient     -- (p,) array, aligned with NetworkSpec.synapses order.
    per_step     -- (T+1, p) causal per-step contributions C^t where the
                    algorithm defines them (rows 1..T), else None.
    flops        -- exact count of multiply-add operations performed by the
                    trace/adjoint update kernels (loss evaluation excluded).
    trace_floats -- peak number of stored trace/adjoint scalars.
    wall_time    -- seconds spent inside the engine.
    extras       -- engine-specific inspection data (adjoints, banks, ...).
    """

    gradient: np.ndarray
    per_step: np.ndarray | None = None
    flops: int = 0
    trace_floats: int = 0
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict)
