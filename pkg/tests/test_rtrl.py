"""Forward recurrence-variable engine and its exactness claims."""

import numpy as np
import pytest

from cases import chain_case, self_recurrent_case
from rnngrad import (bptt_gradient, local_jacobians, readout_forward,
                     rtrl_gradient, rtrl_step, simulate, total_loss_partials,
                     zero_recurrence_bank)
from rnngrad.harness import random_dense_network, relative_deviation


def _pipeline(spec, inputs, T, targets):
    traj = simulate(spec, inputs, T)
    jac = local_jacobians(spec, traj)
    y, _ = readout_forward(spec.readout, traj, targets)
    lp = total_loss_partials(spec.readout, y, targets)
    return traj, jac, lp


def test_first_step_from_zero_bank_is_the_weight_sensitivity():
    rng = np.random.default_rng(20)
    spec = random_dense_network(rng, "leaky_tanh", 3, input_dim=2, K=1)
    traj, jac, _ = _pipeline(spec, rng.normal(size=(4, 2)), 4,
                             np.zeros((5, 1)))
    bank = rtrl_step(zero_recurrence_bank(spec), jac, 1, spec)
    for s, (_, j) in enumerate(spec.synapses):
        for r in range(spec.n):
            expect = jac.G[1, s] if r == j else np.zeros(spec.d_h)
            np.testing.assert_array_equal(bank[r, s], expect)


def test_no_explicit_recurrence_reduces_to_implicit_traces():
    """With E == 0, off-target bank rows stay zero and the target row is
    the implicit accumulator of the weight sensitivities."""
    spec, inputs, T, targets = chain_case()
    traj, jac, lp = _pipeline(spec, inputs, T, targets)
    assert np.all(jac.E == 0.0)
    bank = zero_recurrence_bank(spec)
    eps = np.zeros((spec.p, spec.d_h))
    for t in range(1, T + 1):
        bank = rtrl_step(bank, jac, t, spec)
        eps = np.einsum("pab,pb->pa", jac.D[t, spec.targets], eps) + jac.G[t]
        np.testing.assert_array_equal(bank[spec.targets[0]], eps)


def test_chain_case_gradient():
    spec, inputs, T, targets = chain_case()
    traj, jac, lp = _pipeline(spec, inputs, T, targets)
    rep = rtrl_gradient(spec, traj, jac, lp)
    assert rep.gradient[0] == pytest.approx(3.25, abs=1e-12)


def test_self_recurrent_case_per_step_contributions():
    spec, inputs, T, targets = self_recurrent_case()
    traj, jac, lp = _pipeline(spec, inputs, T, targets)
    rep = rtrl_gradient(spec, traj, jac, lp)
    assert rep.gradient[0] == pytest.approx(2.0, abs=1e-12)
    assert rep.per_step[1, 0] == pytest.approx(1.0, abs=1e-12)
    assert rep.per_step[2, 0] == pytest.approx(1.0, abs=1e-12)


def test_zero_loss_partials_give_zero_everything():
    rng = np.random.default_rng(21)
    spec = random_dense_network(rng, "lif", 4, input_dim=2, K=1)
    traj = simulate(spec, rng.normal(0.0, 2.0, (6, 2)), 6)
    jac = local_jacobians(spec, traj)
    rep = rtrl_gradient(spec, traj, jac, np.zeros((7, spec.n)))
    np.testing.assert_array_equal(rep.gradient, np.zeros(spec.p))
    np.testing.assert_array_equal(rep.per_step, np.zeros((7, spec.p)))


@pytest.mark.parametrize("kind", ["leaky_tanh", "lif", "alif"])
def test_per_step_decomposition_is_bit_exact(kind):
    rng = np.random.default_rng(22)
    spec = random_dense_network(rng, kind, 5, input_dim=2, K=2)
    inputs = rng.normal(0.0, 1.5, (10, 2))
    targets = rng.normal(size=(11, 2))
    traj, jac, lp = _pipeline(spec, inputs, 10, targets)
    rep = rtrl_gradient(spec, traj, jac, lp)
    acc = np.zeros(spec.p)
    for t in range(1, 11):
        acc += rep.per_step[t]
    np.testing.assert_array_equal(acc, rep.gradient)


@pytest.mark.parametrize("kind", ["leaky_tanh", "lif", "alif"])
def test_matches_backward_engine(kind):
    rng = np.random.default_rng(23)
    for trial in range(5):
        n = int(rng.integers(2, 9))
        T = int(rng.integers(4, 25))
        spec = random_dense_network(rng, kind, n, input_dim=2, K=2)
        inputs = rng.normal(0.0, 1.5, (T, 2))
        targets = rng.normal(size=(T + 1, 2))
        traj, jac, lp = _pipeline(spec, inputs, T, targets)
        g_b = bptt_gradient(spec, traj, jac, lp).gradient
        g_r = rtrl_gradient(spec, traj, jac, lp).gradient
        assert relative_deviation(g_b, g_r) < 1e-10


def test_bank_storage_shape():
    rng = np.random.default_rng(24)
    spec = random_dense_network(rng, "alif", 4, input_dim=2, K=1)
    assert zero_recurrence_bank(spec).shape == (spec.n, spec.p, spec.d_h)
    traj = simulate(spec, rng.normal(size=(3, 2)), 3)
    jac = local_jacobians(spec, traj)
    rep = rtrl_gradient(spec, traj, jac, np.zeros((4, spec.n)))
    assert rep.trace_floats == spec.n * spec.p * spec.d_h
