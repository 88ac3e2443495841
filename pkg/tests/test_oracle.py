"""Brute-force definitional sums and the finite-difference gradient."""

import numpy as np
import pytest

from cases import chain_case
from rnngrad import (bptt_gradient, implicit_trace_step, local_jacobians,
                     readout_forward, rtrl_step, simulate,
                     total_loss_partials, zero_implicit_trace,
                     zero_recurrence_bank)
from rnngrad.harness import random_dense_network, relative_deviation
from rnngrad.oracle import (PathBlowup, explicit_variable_definitional,
                            fd_gradient, implicit_variable_definitional,
                            recurrence_variable_definitional,
                            readout_variable_definitional)


def test_fd_rejects_spiking_and_bad_steps():
    rng = np.random.default_rng(50)
    spec = random_dense_network(rng, "lif", 3, input_dim=2, K=1)
    inputs = rng.normal(size=(4, 2))
    with pytest.raises(ValueError):
        fd_gradient(spec, inputs, 4)
    spec = random_dense_network(rng, "leaky_tanh", 3, input_dim=2, K=1)
    with pytest.raises(ValueError):
        fd_gradient(spec, inputs, 4, step=0.0)


def test_fd_on_the_worked_chain_case():
    spec, inputs, T, targets = chain_case()
    grad = fd_gradient(spec, inputs, T, targets=targets)
    assert grad[0] == pytest.approx(3.25, abs=1e-6)


def test_fd_on_a_quiet_network_is_zero():
    spec, _, T, targets = chain_case()
    grad = fd_gradient(spec, np.zeros((T, 1)), T, targets=targets)
    assert grad[0] == pytest.approx(0.0, abs=1e-9)


def test_fd_matches_the_backward_engine():
    rng = np.random.default_rng(51)
    spec = random_dense_network(rng, "leaky_tanh", 5, input_dim=2, K=2)
    inputs = rng.normal(size=(10, 2))
    targets = rng.normal(size=(11, 2))
    traj = simulate(spec, inputs, 10)
    jac = local_jacobians(spec, traj)
    y, _ = readout_forward(spec.readout, traj, targets)
    lp = total_loss_partials(spec.readout, y, targets)
    g_b = bptt_gradient(spec, traj, jac, lp).gradient
    g_fd = fd_gradient(spec, inputs, 10, targets=targets)
    assert relative_deviation(g_fd, g_b) < 1e-5


def test_implicit_definitional_matches_the_incremental_trace():
    rng = np.random.default_rng(52)
    for kind in ("leaky_tanh", "alif"):
        spec = random_dense_network(rng, kind, 3, input_dim=1, K=1)
        T = 5
        traj = simulate(spec, rng.normal(0.0, 1.5, (T, 1)), T)
        jac = local_jacobians(spec, traj)
        trace = zero_implicit_trace(spec)
        for t in range(1, T + 1):
            trace = implicit_trace_step(trace, jac, t, spec)
            for s, (i, j) in enumerate(spec.synapses):
                ref = implicit_variable_definitional(traj, jac, spec, i, j, t)
                np.testing.assert_allclose(trace.eps[s], ref, atol=1e-12)


def test_path_sum_base_case_is_the_implicit_variable():
    rng = np.random.default_rng(53)
    spec = random_dense_network(rng, "leaky_tanh", 2, input_dim=1, K=1)
    traj = simulate(spec, rng.normal(size=(3, 1)), 3)
    jac = local_jacobians(spec, traj)
    i, j = spec.synapses[0]
    base = explicit_variable_definitional(traj, jac, spec, i, j, (j,), 3)
    ref = implicit_variable_definitional(traj, jac, spec, i, j, 3)
    np.testing.assert_array_equal(base, ref)
    with pytest.raises(ValueError):
        explicit_variable_definitional(traj, jac, spec, i, j, (1 - j,), 3)


def test_recurrence_definitional_matches_the_forward_bank():
    rng = np.random.default_rng(54)
    spec = random_dense_network(rng, "leaky_tanh", 2, input_dim=1, K=1)
    T = 4
    traj = simulate(spec, rng.normal(size=(T, 1)), T)
    jac = local_jacobians(spec, traj)
    bank = zero_recurrence_bank(spec)
    for t in range(1, T + 1):
        bank = rtrl_step(bank, jac, t, spec)
        for s, (i, j) in enumerate(spec.synapses):
            for r in range(spec.n):
                ref = recurrence_variable_definitional(traj, jac, spec,
                                                       i, j, r, t)
                np.testing.assert_allclose(bank[r, s], ref, atol=1e-12)


def test_no_explicit_recurrence_collapses_the_path_sum():
    spec, inputs, T, targets = chain_case()
    traj = simulate(spec, inputs, T)
    jac = local_jacobians(spec, traj)
    i, j = spec.synapses[0]
    on_target = recurrence_variable_definitional(traj, jac, spec, i, j, j, T)
    ref = implicit_variable_definitional(traj, jac, spec, i, j, T)
    np.testing.assert_allclose(on_target, ref, atol=1e-15)


def test_path_enumeration_refuses_blowup():
    rng = np.random.default_rng(55)
    spec = random_dense_network(rng, "leaky_tanh", 3, input_dim=1, K=1)
    T = 6
    traj = simulate(spec, rng.normal(size=(T, 1)), T)
    jac = local_jacobians(spec, traj)
    i, j = spec.synapses[-1]
    with pytest.raises(PathBlowup):
        recurrence_variable_definitional(traj, jac, spec, i, j, 0, T,
                                         max_paths=10)


def test_readout_definitional_is_the_kappa_power_sum():
    rng = np.random.default_rng(56)
    from rnngrad.readout import ReadoutSpec
    rspec = ReadoutSpec(kind="leaky", w_out=rng.normal(size=(1, 2)),
                        b_out=np.zeros(2), kappa=0.6)
    e_series = np.concatenate([[0.0], rng.normal(size=4)])
    for t in range(1, 5):
        for k in range(2):
            got = readout_variable_definitional(rspec, e_series, k,
                                                rspec.w_out[0], t)
            expect = sum(0.6 ** (t - u) * rspec.w_out[0, k] * e_series[u]
                         for u in range(1, t + 1))
            assert got == pytest.approx(expect, abs=1e-15)
