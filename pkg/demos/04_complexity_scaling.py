"""Cost scaling of the three gradient engines.

Each engine reports an exact count of multiply-add operations in its
trace or adjoint update kernels plus its peak stored trace floats.  Per
synapse count p, the per-step flops grow linearly for the backward engine
and the local traces but quadratically for the forward recurrence bank;
memory is O(nT) backward, O(np) forward, O(p) local.
"""

import numpy as np

from rnngrad.harness import ExperimentConfig, run_complexity_benchmark

result = run_complexity_benchmark(ExperimentConfig(), sizes=(8, 16, 32, 64))
print(",".join(result.columns))
for row in result.rows:
    print(",".join(str(v) for v in row))
print()
for name, slope in result.summary["slopes"].items():
    print(f"fitted log-log slope of per-step flops vs p, {name}: {slope:.3f}")
