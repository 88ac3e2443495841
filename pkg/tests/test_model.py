"""Model core: cells, simulation, serialization and local Jacobians."""

import numpy as np
import pytest

from rnngrad import (ALIF, LIF, LeakyTanh, NetworkSpec, SimulationDivergence,
                     local_jacobians, simulate)
from rnngrad.harness import random_dense_network
from rnngrad.model import output_map, step_dynamics


def _random_spec(rng, kind="leaky_tanh", n=4):
    return random_dense_network(rng, kind, n, input_dim=2, K=1)


# ---------------------------------------------------------------------------
# cell and spec validation


def test_cell_parameter_validation():
    with pytest.raises(ValueError):
        LeakyTanh(leak=1.0)
    with pytest.raises(ValueError):
        LeakyTanh(leak=-0.1)
    LeakyTanh(leak=0.0)          # memoryless cell is allowed
    with pytest.raises(ValueError):
        LIF(leak=0.0)
    with pytest.raises(ValueError):
        LIF(v_th=-1.0)
    with pytest.raises(ValueError):
        ALIF(rho=1.0)
    with pytest.raises(ValueError):
        ALIF(beta_a=-0.5)


def test_spec_rejects_bad_synapses():
    cell = LeakyTanh()
    with pytest.raises(ValueError):
        NetworkSpec(n=1, input_dim=1, cell=cell,
                    synapses=((0, 0), (0, 0)), weights=np.ones(2))
    with pytest.raises(ValueError):
        NetworkSpec(n=1, input_dim=1, cell=cell,
                    synapses=((5, 0),), weights=np.ones(1))
    with pytest.raises(ValueError):
        NetworkSpec(n=1, input_dim=1, cell=cell,
                    synapses=((0, 3),), weights=np.ones(1))
    with pytest.raises(ValueError):
        NetworkSpec(n=1, input_dim=1, cell=cell,
                    synapses=((0, 0),), weights=np.ones(2))


def test_synapse_index_lookup():
    rng = np.random.default_rng(0)
    spec = _random_spec(rng)
    for s, (i, j) in enumerate(spec.synapses):
        assert spec.synapse_index(i, j) == s
    with pytest.raises(KeyError):
        spec.synapse_index(99, 0)


# ---------------------------------------------------------------------------
# simulation


@pytest.mark.parametrize("kind", ["leaky_tanh", "lif", "alif"])
def test_resimulation_is_bit_identical(kind):
    rng = np.random.default_rng(1)
    spec = _random_spec(rng, kind)
    inputs = rng.normal(0.0, 1.5, (12, spec.input_dim))
    t1 = simulate(spec, inputs, 12)
    t2 = simulate(spec, inputs, 12)
    assert np.array_equal(t1.h, t2.h)
    assert np.array_equal(t1.o, t2.o)


def test_zero_state_start():
    rng = np.random.default_rng(2)
    spec = _random_spec(rng)
    traj = simulate(spec, rng.normal(size=(5, spec.input_dim)), 5)
    assert np.all(traj.h[0] == 0.0)
    assert np.all(traj.o[0] == 0.0)


def test_simulation_divergence_reports_location():
    cell = LeakyTanh(leak=0.5, linear_output=True)
    spec = NetworkSpec(n=1, input_dim=1, cell=cell, synapses=((0, 0),),
                       weights=np.array([1.0]))
    inputs = np.array([[1.0], [np.inf], [1.0]])
    with pytest.raises(SimulationDivergence) as err:
        simulate(spec, inputs, 3)
    assert err.value.t == 2
    assert err.value.j == 0


def test_simulate_rejects_short_inputs():
    rng = np.random.default_rng(3)
    spec = _random_spec(rng)
    with pytest.raises(ValueError):
        simulate(spec, np.zeros((3, spec.input_dim)), 5)


def test_spiking_outputs_are_binary():
    rng = np.random.default_rng(4)
    for kind in ("lif", "alif"):
        spec = _random_spec(rng, kind)
        traj = simulate(spec, rng.normal(0.0, 2.0, (16, spec.input_dim)), 16)
        assert set(np.unique(traj.o)) <= {0.0, 1.0}
        assert traj.o.sum() > 0    # the drive scale should elicit spikes


# ---------------------------------------------------------------------------
# serialization


@pytest.mark.parametrize("kind", ["leaky_tanh", "lif", "alif"])
def test_json_round_trip(kind, tmp_path):
    rng = np.random.default_rng(5)
    spec = _random_spec(rng, kind)
    text = spec.to_json()
    back = NetworkSpec.from_json(text)
    assert back.n == spec.n and back.input_dim == spec.input_dim
    assert back.synapses == spec.synapses
    assert np.array_equal(back.weights, spec.weights)
    assert back.cell == spec.cell
    assert np.array_equal(back.readout.w_out, spec.readout.w_out)
    inputs = rng.normal(size=(6, spec.input_dim))
    assert np.array_equal(simulate(spec, inputs, 6).h,
                          simulate(back, inputs, 6).h)


def test_trajectory_csv_export(tmp_path):
    rng = np.random.default_rng(6)
    spec = _random_spec(rng, "alif", n=2)
    traj = simulate(spec, rng.normal(size=(3, spec.input_dim)), 3)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,neuron,h_0,h_1,o"
    assert len(lines) == 1 + 4 * 2      # (T+1) steps x n neurons
    t, j, h0, h1, o = lines[-1].split(",")
    assert float(h0) == traj.h[3, 1, 0]
    assert float(h1) == traj.h[3, 1, 1]


# ---------------------------------------------------------------------------
# local Jacobians


def test_jacobians_match_finite_differences_smooth():
    """Each D, psi, E, G entry against a central difference of the
    single-step map, on random states (relative 1e-6, step 1e-6)."""
    rng = np.random.default_rng(7)
    spec = random_dense_network(rng, "leaky_tanh", 8, input_dim=2, K=1)
    n, step = spec.n, 1e-6
    inputs = rng.normal(size=(6, spec.input_dim))
    traj = simulate(spec, inputs, 6)
    jac = local_jacobians(spec, traj)
    W = spec.weight_matrix()
    t = 4
    h_prev, o_prev = traj.h[t - 1], traj.o[t - 1]
    prev = traj.node_outputs(t - 1)

    def step_h(h_p, o_p, weights=None):
        Wm = spec.with_weights(weights).weight_matrix() if weights is not None else W
        drive = np.concatenate([inputs[t - 1], o_p]) @ Wm
        return step_dynamics(spec.cell, n, h_p, o_p, drive)[0]

    # D: dh^t / dh^{t-1}
    for j in range(n):
        hp = h_prev.copy(); hm = h_prev.copy()
        hp[j, 0] += step; hm[j, 0] -= step
        fd = (step_h(hp, o_prev)[j, 0] - step_h(hm, o_prev)[j, 0]) / (2 * step)
        assert fd == pytest.approx(jac.D[t, j, 0, 0], rel=1e-6)

    # psi: do^t / dh^t
    h_t = traj.h[t]
    for j in range(n):
        hp = h_t.copy(); hm = h_t.copy()
        hp[j, 0] += step; hm[j, 0] -= step
        fd = (output_map(spec.cell, n, hp)[j] -
              output_map(spec.cell, n, hm)[j]) / (2 * step)
        assert fd == pytest.approx(jac.psi[t, j, 0], rel=1e-6, abs=1e-9)

    # E: dh^t_k / do^{t-1}_j
    for j in range(n):
        op = o_prev.copy(); om = o_prev.copy()
        op[j] += step; om[j] -= step
        fd = (step_h(h_prev, op)[:, 0] - step_h(h_prev, om)[:, 0]) / (2 * step)
        np.testing.assert_allclose(fd, jac.E[t - 1, :, j, 0],
                                   rtol=1e-6, atol=1e-9)

    # G: dh^t_tgt / dw_s
    for s in range(spec.p):
        wp = spec.weights.copy(); wm = spec.weights.copy()
        wp[s] += step; wm[s] -= step
        j = spec.targets[s]
        fd = (step_h(h_prev, o_prev, wp)[j, 0] -
              step_h(h_prev, o_prev, wm)[j, 0]) / (2 * step)
        assert fd == pytest.approx(jac.G[t, s, 0], rel=1e-6, abs=1e-9)


def test_explicit_jacobian_sparsity():
    """Nonzero E columns mirror connectivity: the recurrent synapse pairs,
    plus the diagonal reset/adaptation terms for spiking cells."""
    rng = np.random.default_rng(8)
    for kind in ("leaky_tanh", "lif", "alif"):
        spec = random_dense_network(rng, kind, 4, input_dim=2, K=1)
        traj = simulate(spec, rng.normal(size=(4, 2)), 4)
        jac = local_jacobians(spec, traj)
        pairs = {(j, i - spec.input_dim) for i, j in spec.synapses
                 if i >= spec.input_dim}
        if spec.cell.spiking:
            pairs |= {(j, j) for j in range(spec.n)}
        assert jac.nonzero_E_pairs() == len(pairs)
        # dense connectivity here, so every recurrent pair is present
        got = {(k, j) for k in range(spec.n) for j in range(spec.n)
               if np.any(jac.E[0, k, j] != 0.0)}
        assert got == pairs


def test_alif_jacobian_structure():
    rng = np.random.default_rng(9)
    spec = random_dense_network(rng, "alif", 3, input_dim=1, K=1)
    traj = simulate(spec, rng.normal(0.0, 2.0, (5, 1)), 5)
    jac = local_jacobians(spec, traj)
    cell = spec.cell
    # D = diag(alpha, rho) for every neuron and step
    np.testing.assert_array_equal(jac.D[1:, :, 0, 0], cell.leak)
    np.testing.assert_array_equal(jac.D[1:, :, 1, 1], cell.rho)
    assert np.all(jac.D[1:, :, 0, 1] == 0.0)
    # psi couples the adaptation component with -beta_a
    np.testing.assert_allclose(jac.psi[1:, :, 1],
                               -cell.beta_a * jac.psi[1:, :, 0], atol=1e-15)
    # self-explicit column carries both the reset and the spike-to-b term
    for j in range(spec.n):
        w_jj = spec.recurrent_matrix()[j, j]
        assert jac.E[0, j, j, 0] == w_jj - cell.reset * cell.v_th
        assert jac.E[0, j, j, 1] == 1.0
