"""Experiment driver: equivalence suites, approximation curves, complexity
benchmarks and online-vs-offline training comparisons.

All entry points consume an ExperimentConfig and return a SuiteResult whose
rows serialize deterministically to CSV (identical config + seed gives
byte-identical output).  The RGL_THREADS environment variable caps worker
parallelism across trials.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bptt import bptt_gradient
from .eprop import eprop_gradient, m_order_gradient
from .model import (ALIF, LIF, LeakyTanh, NetworkSpec, SimulationDivergence,
                    local_jacobians, simulate)
from .readout import (LEAKY, STATIC, ReadoutSpec, eprop_readout_gradient,
                      loss_partials_y, lsnn_gradient, readout_forward,
                      static_loss_partials, total_loss_partials)
from .rtrl import rtrl_gradient, zero_recurrence_bank, rtrl_step

TOL_EXACT = 1e-10        # BPTT <-> RTRL <-> m-order(T)
TOL_IDENTITY = 1e-12     # LSNN <-> readout-trace rearrangement
TOL_FD = 1e-4            # finite differences, smooth cells

ALGORITHMS = ("bptt", "rtrl", "eprop", "morder", "eprop-readout", "lsnn")
CELL_KINDS = ("leaky_tanh", "lif", "alif")


@dataclass(frozen=True)
class ExperimentConfig:
    """Driver configuration; JSON files mirror these field names exactly."""

    network: str | dict | None = None       # inline spec document or file path
    task: str = "TeacherStudent"            # or "SinePattern"
    algorithms: tuple = ("bptt", "rtrl", "eprop", "morder")
    T: int = 32
    trials: int = 20
    seeds: tuple = (0,)
    out: str | None = None
    update_mode: str = "OfflineAfterT"      # or "OnlinePerStep"
    learning_rate: float = 0.005

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        cfg = ExperimentConfig()
        fields = {k: doc[k] for k in doc}
        for key in ("algorithms", "seeds"):
            if key in fields:
                fields[key] = tuple(fields[key])
        return replace(cfg, **fields)


@dataclass
class SuiteResult:
    """Rows of (instance, algorithm/metric, value, tolerance, pass)."""

    kind: str
    columns: tuple
    rows: list
    passed: bool
    summary: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    def to_json(self, path):
        doc = {"kind": self.kind, "passed": self.passed,
               "summary": self.summary,
               "columns": list(self.columns),
               "rows": [[_jsonable(v) for v in row] for row in self.rows]}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _worker_count():
    try:
        return max(1, int(os.environ.get("RGL_THREADS", "1")))
    except ValueError:
        return 1


def _map_trials(fn, args_list):
    workers = _worker_count()
    if workers == 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def relative_deviation(a, b):
    """max |a - b| over the larger of the two infinity norms (0 if both 0)."""
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - b)) / scale)


# ---------------------------------------------------------------------------
# instance generation


def make_cell(kind, rng):
    if kind == "leaky_tanh":
        return LeakyTanh(leak=float(rng.uniform(0.2, 0.95)))
    if kind == "lif":
        return LIF(leak=float(rng.uniform(0.5, 0.95)), v_th=1.0,
                   gamma_pd=0.3)
    if kind == "alif":
        return ALIF(leak=float(rng.uniform(0.5, 0.95)), v_th=1.0,
                    gamma_pd=0.3, rho=float(rng.uniform(0.7, 0.98)),
                    beta_a=float(rng.uniform(0.1, 1.0)))
    raise ValueError(f"unknown cell kind {kind!r}")


def random_dense_network(rng, cell_kind, n, input_dim=3, readout_kind=LEAKY,
                         K=2, weight_scale=None, seed=0):
    """Fully connected instance (all input and recurrent synapses)."""
    cell = make_cell(cell_kind, rng)
    synapses = tuple((i, j) for i in range(input_dim) for j in range(n)) + \
        tuple((input_dim + i, j) for i in range(n) for j in range(n))
    fan_in = input_dim + n
    if weight_scale is None:
        weight_scale = (1.5 if cell.spiking else 0.8) / np.sqrt(fan_in)
    weights = rng.normal(0.0, weight_scale, len(synapses))
    readout = ReadoutSpec(kind=readout_kind,
                          w_out=rng.normal(0.0, 1.0, (n, K)),
                          b_out=rng.normal(0.0, 0.2, K),
                          kappa=float(rng.uniform(0.3, 0.9))
                          if readout_kind == LEAKY else 0.0)
    return NetworkSpec(n=n, input_dim=input_dim, cell=cell,
                       synapses=synapses, weights=weights, readout=readout,
                       seed=seed)


def random_instance(rng, cell_kind, max_n=16, max_T=64, **kwargs):
    """Random dense instance plus inputs and readout targets."""
    n = int(rng.integers(2, max_n + 1))
    T = int(rng.integers(4, max_T + 1))
    spec = random_dense_network(rng, cell_kind, n, **kwargs)
    drive = 1.0 if not spec.cell.spiking else 1.5
    inputs = rng.normal(0.0, drive, (T, spec.input_dim))
    targets = np.vstack([np.zeros((1, spec.readout.K)),
                         rng.normal(0.0, 1.0, (T, spec.readout.K))])
    return spec, inputs, T, targets


# ---------------------------------------------------------------------------
# equivalence suite


def run_equivalence_suite(config, cell_kinds=CELL_KINDS, max_n=16, max_T=64,
                          mutate_jacobian=False):
    """Pairwise-deviation table for every instance; the executable form of
    the algorithm-relation map.

    With mutate_jacobian=True the sign of one explicit-recurrence Jacobian
    entry is flipped in the forward engines of the first instance; the
    suite must then fail (mutation self-test).
    """
    columns = ("instance", "cell", "n", "T", "metric", "value", "tolerance",
               "status")
    jobs = []
    idx = 0
    for seed in config.seeds:
        for kind in cell_kinds:
            for trial in range(config.trials):
                jobs.append((idx, seed, kind, trial))
                idx += 1

    def one(job):
        i, seed, kind, trial = job
        rng = np.random.default_rng((seed, CELL_KINDS.index(kind), trial))
        spec, inputs, T, targets = random_instance(rng, kind, max_n, max_T)
        rows = []
        try:
            traj = simulate(spec, inputs, T)
        except SimulationDivergence as exc:
            return [(i, kind, spec.n, T, "simulate", float("nan"), 0.0,
                     f"flagged:{exc}")]
        jac = local_jacobians(spec, traj)
        jac_fwd = jac
        if mutate_jacobian and i == 0:
            jac_fwd = _flip_one_explicit_entry(jac)
        y, _ = readout_forward(spec.readout, traj, targets)
        lp = total_loss_partials(spec.readout, y, targets)
        g_bptt = bptt_gradient(spec, traj, jac, lp).gradient
        g_rtrl = rtrl_gradient(spec, traj, jac_fwd, lp).gradient
        g_mT = m_order_gradient(spec, traj, jac_fwd, lp, T).gradient
        if not np.all(np.isfinite(g_bptt)) or not np.all(np.isfinite(g_rtrl)):
            return [(i, kind, spec.n, T, "finite", float("nan"), 0.0,
                     "flagged:non-finite gradient")]

        def add(metric, value, tol):
            rows.append((i, kind, spec.n, T, metric, value, tol,
                         "pass" if value <= tol else "FAIL"))

        add("bptt_vs_rtrl", relative_deviation(g_bptt, g_rtrl), TOL_EXACT)
        add("bptt_vs_morder_T", relative_deviation(g_bptt, g_mT), TOL_EXACT)
        if spec.cell.spiking:
            rows.append((i, kind, spec.n, T, "fd_vs_bptt", float("nan"), TOL_FD,
                         "skipped: non-differentiable"))
        else:
            from .oracle import fd_gradient
            g_fd = fd_gradient(spec, inputs, T, targets=targets)
            add("fd_vs_bptt", relative_deviation(g_fd, g_bptt), TOL_FD)
        g_ro = eprop_readout_gradient(spec, traj, jac, targets).gradient
        g_ls = lsnn_gradient(spec, traj, jac, targets).gradient
        add("lsnn_vs_readout_trace", relative_deviation(g_ro, g_ls),
            TOL_IDENTITY)
        return rows

    all_rows = [r for rows in _map_trials(one, jobs) for r in rows]
    passed = all(r[-1] != "FAIL" for r in all_rows)
    n_fail = sum(1 for r in all_rows if r[-1] == "FAIL")
    return SuiteResult(kind="equivalence", columns=columns, rows=all_rows,
                       passed=passed,
                       summary={"instances": idx, "failed_rows": n_fail})


def _flip_one_explicit_entry(jac):
    """Flip the sign of the first nonzero E column (self-test mutation)."""
    E = jac.E.copy()
    flat = np.flatnonzero(E[1])
    if flat.size == 0:
        raise ValueError("network has no explicit-recurrence entries")
    k, j, a = np.unravel_index(flat[0], E[1].shape)
    E[:, k, j, a] *= -1.0
    return type(jac)(D=jac.D, psi=jac.psi, E=E, G=jac.G)


# ---------------------------------------------------------------------------
# approximation report


def run_approximation_report(config, cell_kinds=("leaky_tanh",), max_n=8,
                             max_T=16):
    """Per-order error curve of the truncation family against the exact
    gradient: relative L2 error and cosine similarity for m = 1..T."""
    columns = ("instance", "cell", "n", "T", "m", "rel_l2_error",
               "cosine_similarity", "status")
    jobs = []
    idx = 0
    for seed in config.seeds:
        for kind in cell_kinds:
            for trial in range(config.trials):
                jobs.append((idx, seed, kind, trial))
                idx += 1

    def one(job):
        i, seed, kind, trial = job
        rng = np.random.default_rng((seed + 101, CELL_KINDS.index(kind), trial))
        spec, inputs, T, targets = random_instance(rng, kind, max_n, max_T)
        traj = simulate(spec, inputs, T)
        jac = local_jacobians(spec, traj)
        y, _ = readout_forward(spec.readout, traj, targets)
        lp = total_loss_partials(spec.readout, y, targets)
        exact = bptt_gradient(spec, traj, jac, lp).gradient
        norm = np.linalg.norm(exact)
        rows = []
        for m in range(1, T + 1):
            approx = m_order_gradient(spec, traj, jac, lp, m).gradient
            err = float(np.linalg.norm(approx - exact) / norm) if norm else 0.0
            an = np.linalg.norm(approx)
            cos = float(approx @ exact / (an * norm)) if an and norm else 1.0
            terminal_ok = m < T or err < TOL_EXACT
            rows.append((i, kind, spec.n, T, m, err, cos,
                         "pass" if terminal_ok else "FAIL"))
        return rows

    all_rows = [r for rows in _map_trials(one, jobs) for r in rows]
    passed = all(r[-1] != "FAIL" for r in all_rows)
    return SuiteResult(kind="approximation", columns=columns, rows=all_rows,
                       passed=passed, summary={"instances": idx})


# ---------------------------------------------------------------------------
# complexity benchmark


def closed_form_trace_floats(algorithm, n, p, d_h, T):
    """Peak stored trace scalars each engine is required to hit exactly."""
    if algorithm == "eprop":
        return p * (d_h + 1)
    if algorithm == "rtrl":
        return n * p * d_h
    if algorithm == "bptt":
        return n * T * (d_h + 1)
    raise ValueError(f"no closed form for {algorithm!r}")


def run_complexity_benchmark(config, sizes=(8, 16, 32), T=8,
                             cell_kind="leaky_tanh", input_dim=4):
    """Measured per-step flops and trace floats vs synapse count, with
    fitted log-log slopes (expected: BPTT ~ 1, e-prop ~ 1, RTRL ~ 2)."""
    columns = ("n", "p", "algorithm", "flops_per_step", "trace_floats",
               "trace_floats_expected", "wall_time", "status")
    engines = {"bptt": bptt_gradient, "rtrl": rtrl_gradient,
               "eprop": eprop_gradient}
    rows = []
    flops = {name: [] for name in engines}
    ps = []
    for n in sizes:
        rng = np.random.default_rng((config.seeds[0], n))
        spec = random_dense_network(rng, cell_kind, n, input_dim=input_dim,
                                    readout_kind=STATIC)
        inputs = rng.normal(0.0, 1.0, (T, input_dim))
        targets = np.vstack([np.zeros((1, spec.readout.K)),
                             rng.normal(0.0, 1.0, (T, spec.readout.K))])
        traj = simulate(spec, inputs, T)
        jac = local_jacobians(spec, traj)
        y, _ = readout_forward(spec.readout, traj, targets)
        lp = static_loss_partials(spec.readout, y, targets)
        ps.append(spec.p)
        for name, engine in engines.items():
            rep = engine(spec, traj, jac, lp)
            per_step = rep.flops / T
            expected = closed_form_trace_floats(name, spec.n, spec.p,
                                                spec.d_h, T)
            status = "pass" if rep.trace_floats == expected else "FAIL"
            rows.append((n, spec.p, name, per_step, rep.trace_floats,
                         expected, rep.wall_time, status))
            flops[name].append(per_step)

    slopes = {}
    expected_slopes = {"bptt": 1.0, "eprop": 1.0, "rtrl": 2.0}
    log_p = np.log(np.asarray(ps, dtype=float))
    for name, series in flops.items():
        slope = float(np.polyfit(log_p, np.log(series), 1)[0])
        slopes[name] = slope
        ok = abs(slope - expected_slopes[name]) <= 0.15
        rows.append((0, 0, f"{name}_slope", slope, 0, 0, 0.0,
                     "pass" if ok else "FAIL"))
    passed = all(r[-1] != "FAIL" for r in rows)
    return SuiteResult(kind="complexity", columns=columns, rows=rows,
                       passed=passed, summary={"slopes": slopes})


# ---------------------------------------------------------------------------
# online vs offline training


def make_task(config, rng, n=6, input_dim=3, K=2, cell_kind="leaky_tanh"):
    """Self-contained training task: a student network with a static
    readout, a fixed input sequence and a target series."""
    spec = random_dense_network(rng, cell_kind, n, input_dim=input_dim,
                                readout_kind=STATIC, K=K)
    T = config.T
    inputs = rng.normal(0.0, 1.0, (T, input_dim))
    if config.task == "SinePattern":
        t_axis = np.arange(1, T + 1)
        targets = np.zeros((T + 1, K))
        for k in range(K):
            targets[1:, k] = np.sin(2.0 * np.pi * (k + 1) * t_axis / T)
    elif config.task == "TeacherStudent":
        teacher = random_dense_network(np.random.default_rng(rng.integers(2**32)),
                                       cell_kind, n, input_dim=input_dim,
                                       readout_kind=STATIC, K=K)
        t_traj = simulate(teacher, inputs, T)
        targets, _ = readout_forward(teacher.readout, t_traj,
                                     np.zeros((T + 1, K)))
    else:
        raise ValueError(f"unknown task {config.task!r}")
    return spec, inputs, targets


def _offline_gradient(algorithm, spec, inputs, targets, T):
    traj = simulate(spec, inputs, T)
    jac = local_jacobians(spec, traj)
    y, loss = readout_forward(spec.readout, traj, targets)
    lp = static_loss_partials(spec.readout, y, targets)
    if algorithm == "bptt":
        rep = bptt_gradient(spec, traj, jac, lp)
    elif algorithm == "rtrl":
        rep = rtrl_gradient(spec, traj, jac, lp)
    elif algorithm == "eprop":
        rep = eprop_gradient(spec, traj, jac, lp)
    else:
        raise ValueError(f"unsupported offline algorithm {algorithm!r}")
    return rep.gradient, loss


def train_offline(algorithm, spec, inputs, targets, iterations, eta):
    """Compute the full-sequence gradient, then update (OfflineAfterT)."""
    losses = []
    weights = spec.weights.copy()
    for _ in range(iterations):
        current = spec.with_weights(weights)
        grad, loss = _offline_gradient(algorithm, current, inputs, targets,
                                       inputs.shape[0])
        losses.append(loss)
        if not np.isfinite(loss):
            break
        weights = weights - eta * grad
    return np.asarray(losses), weights


def train_online(algorithm, spec, inputs, targets, iterations, eta):
    """Update the weights with each causal per-step contribution C^t.

    Only the causal engines support this mode (rtrl, eprop).  The weight
    change inside the sequence makes this computationally different from
    the offline algorithms; the divergence is reported, not asserted.
    """
    if algorithm not in ("rtrl", "eprop"):
        raise ValueError("online updates need a causal engine (rtrl, eprop)")
    T = inputs.shape[0]
    rspec = spec.readout
    losses = []
    weights = spec.weights.copy()
    tgt = spec.targets
    for _ in range(iterations):
        current = spec.with_weights(weights)
        n, d_h, p = current.n, current.d_h, current.p
        h = np.zeros((n, d_h))
        o = np.zeros(n)
        eps = np.zeros((p, d_h))
        alpha = zero_recurrence_bank(current) if algorithm == "rtrl" else None
        psi_prev = np.zeros((n, d_h))
        loss = 0.0
        for t in range(1, T + 1):
            current = spec.with_weights(weights)
            traj1 = _one_step_traj(current, h, o, inputs[t - 1])
            jac1 = local_jacobians(current, traj1)
            if algorithm == "rtrl":
                jac1.psi[0] = psi_prev
                alpha = rtrl_step(alpha, jac1, 1, current)
                trace = np.einsum("kb,kpb->kp", jac1.psi[1], alpha)
            else:
                eps = np.einsum("pab,pb->pa", jac1.D[1, tgt], eps) + jac1.G[1]
                trace = None
            h, o = traj1.h[1], traj1.o[1]
            psi_prev = jac1.psi[1]
            y_t = o @ rspec.w_out + rspec.b_out
            dLdy_t = y_t - targets[t]
            loss += 0.5 * float(dLdy_t @ dLdy_t)
            lp_t = dLdy_t @ rspec.w_out.T
            if algorithm == "rtrl":
                c_t = lp_t @ trace
            else:
                e_t = np.einsum("pa,pa->p", jac1.psi[1, tgt], eps)
                c_t = lp_t[tgt] * e_t
            weights = weights - eta * c_t
        losses.append(loss)
        if not np.isfinite(loss):
            break
    return np.asarray(losses), weights


def _one_step_traj(spec, h, o, x):
    """Single-step Trajectory continuing from (h, o) for streaming use."""
    from .model import Trajectory, step_dynamics

    W = spec.weight_matrix()
    prev = np.concatenate([x, o])
    h_new, o_new = step_dynamics(spec.cell, spec.n, h, o, prev @ W)
    if not np.all(np.isfinite(h_new)):
        j = int(np.argwhere(~np.isfinite(h_new))[0][0])
        raise SimulationDivergence(1, j)
    hh = np.stack([h, h_new])
    oo = np.stack([o, o_new])
    return Trajectory(T=1, h=hh, o=oo, inputs=np.asarray([x], dtype=float))


def run_online_training(config, iterations=50):
    """Loss curves per update mode plus the offline RTRL/BPTT identity.

    OfflineAfterT with RTRL must track the BPTT-driven run step for step;
    OnlinePerStep divergence between modes is measured and reported.
    """
    columns = ("algorithm", "mode", "iteration", "loss", "status")
    rng = np.random.default_rng(config.seeds[0])
    spec, inputs, targets = make_task(config, rng)
    eta = config.learning_rate
    rows = []

    loss_bptt, w_bptt = train_offline("bptt", spec, inputs, targets,
                                      iterations, eta)
    loss_rtrl, w_rtrl = train_offline("rtrl", spec, inputs, targets,
                                      iterations, eta)
    for it, lv in enumerate(loss_bptt):
        rows.append(("bptt", "OfflineAfterT", it, float(lv),
                     "flagged:divergent" if not np.isfinite(lv) else "ok"))
    for it, lv in enumerate(loss_rtrl):
        rows.append(("rtrl", "OfflineAfterT", it, float(lv),
                     "flagged:divergent" if not np.isfinite(lv) else "ok"))
    offline_dev = float(np.max(np.abs(w_bptt - w_rtrl)))
    rows.append(("rtrl_vs_bptt_params", "OfflineAfterT", iterations,
                 offline_dev, "pass" if offline_dev <= 1e-12 else "FAIL"))

    summary = {"offline_param_deviation": offline_dev}
    for algorithm in ("rtrl", "eprop"):
        loss_on, w_on = train_online(algorithm, spec, inputs, targets,
                                     iterations, eta)
        loss_off, w_off = train_offline(algorithm, spec, inputs, targets,
                                        iterations, eta)
        for it, lv in enumerate(loss_on):
            rows.append((algorithm, "OnlinePerStep", it, float(lv),
                         "flagged:divergent" if not np.isfinite(lv) else "ok"))
        mode_div = float(np.max(np.abs(w_on - w_off)))
        g_on, _ = _offline_gradient(algorithm if algorithm != "eprop"
                                    else "eprop",
                                    spec.with_weights(w_on), inputs, targets,
                                    inputs.shape[0])
        g_off, _ = _offline_gradient(algorithm, spec.with_weights(w_off),
                                     inputs, targets, inputs.shape[0])
        grad_div = float(np.max(np.abs(g_on - g_off)))
        rows.append((f"{algorithm}_mode_divergence", "reported", iterations,
                     mode_div, "ok"))
        summary[f"{algorithm}_param_divergence"] = mode_div
        summary[f"{algorithm}_final_gradient_divergence"] = grad_div

    passed = all(r[-1] != "FAIL" for r in rows)
    return SuiteResult(kind="training", columns=columns, rows=rows,
                       passed=passed, summary=summary)


# ---------------------------------------------------------------------------
# oracle suite (executable incremental-vs-definitional proofs)


def run_oracle_suite(config, instances=100, max_n=3, max_T=5, tol=1e-12):
    """Check every incremental recursion against its definitional sum on
    small random instances (implicit, order bank, recurrence, readout)."""
    from . import oracle
    from .eprop import implicit_trace_step, order_trace_step, \
        zero_implicit_trace, zero_order_bank
    from .readout import readout_trace_step

    columns = ("instance", "cell", "n", "T", "check", "max_abs_error",
               "status")
    rows = []
    kinds = ("leaky_tanh", "lif", "alif")
    for i in range(instances):
        rng = np.random.default_rng((config.seeds[0] + 999, i))
        kind = kinds[i % len(kinds)]
        n = int(rng.integers(2, max_n + 1))
        T = int(rng.integers(2, max_T + 1))
        spec = random_dense_network(rng, kind, n, input_dim=1,
                                    readout_kind=LEAKY, K=1)
        inputs = rng.normal(0.0, 1.5, (T, 1))
        traj = simulate(spec, inputs, T)
        jac = local_jacobians(spec, traj)

        errs = {"implicit": 0.0, "order_bank": 0.0, "recurrence": 0.0,
                "readout": 0.0}
        trace = zero_implicit_trace(spec)
        bank = zero_order_bank(spec, T)
        alpha = zero_recurrence_bank(spec)
        gamma = np.zeros((spec.readout.K, spec.p))
        e_hist = np.zeros((T + 1, spec.p))
        for t in range(1, T + 1):
            new_trace = implicit_trace_step(trace, jac, t, spec)
            bank = order_trace_step(bank, trace, jac, t, spec,
                                    eps_t=new_trace.eps)
            trace = new_trace
            alpha = rtrl_step(alpha, jac, t, spec)
            gamma = readout_trace_step(gamma, spec.readout, trace.e,
                                       spec.targets)
            e_hist[t] = trace.e
            for s, (src, j) in enumerate(spec.synapses):
                ref = oracle.implicit_variable_definitional(traj, jac, spec,
                                                            src, j, t)
                errs["implicit"] = max(errs["implicit"],
                                       float(np.max(np.abs(ref - trace.eps[s]))))
                for r in range(spec.n):
                    ref_a = oracle.recurrence_variable_definitional(
                        traj, jac, spec, src, j, r, t)
                    errs["recurrence"] = max(
                        errs["recurrence"],
                        float(np.max(np.abs(ref_a - alpha[r, s]))))
                    # aggregated order slices vs path-indexed sums
                    for order in range(min(t, T)):
                        ref_b = _aggregated_beta(oracle, traj, jac, spec, src,
                                                 j, r, order, t)
                        errs["order_bank"] = max(
                            errs["order_bank"],
                            float(np.max(np.abs(ref_b - bank[order, r, s]))))
                for k in range(spec.readout.K):
                    ref_g = oracle.readout_variable_definitional(
                        spec.readout, e_hist[:, s], k,
                        spec.readout.w_out[j], t)
                    errs["readout"] = max(errs["readout"],
                                          abs(ref_g - gamma[k, s]))
        for check, err in errs.items():
            rows.append((i, kind, n, T, check, err,
                         "pass" if err <= tol else "FAIL"))
    passed = all(r[-1] != "FAIL" for r in rows)
    worst = max(r[5] for r in rows)
    return SuiteResult(kind="oracle", columns=columns, rows=rows,
                       passed=passed, summary={"worst_abs_error": worst})


def _aggregated_beta(oracle, traj, jac, spec, src, j, r, order, t):
    """Sum of path-indexed explicit variables over all paths of a fixed
    jump count from r to j (the definitional form of one bank slice)."""
    import itertools

    if order == 0:
        if r != j:
            return np.zeros(spec.d_h)
        return oracle.implicit_variable_definitional(traj, jac, spec, src, j, t)
    total = np.zeros(spec.d_h)
    for mids in itertools.product(range(spec.n), repeat=order - 1):
        path = (r,) + mids + (j,)
        total += oracle.explicit_variable_definitional(traj, jac, spec, src,
                                                       j, path, t)
    return total
