"""Unit tests for the reduced model core."""

import math

import numpy as np
import pytest

from ringlab import model
from ringlab.model import (CortexState, ModelSpec, RingModelError, Stimulus,
                           galerkin_rhs, group_act, integrate,
                           make_lgn_stimulus, reconstruct_activity,
                           reconstruct_voltage, rhs_vector, sigmoid_eval,
                           stimulus_drive)

SPEC = ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,), gain=15.0)


class TestModelSpec:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,), gain=-1.0)
        with pytest.raises(ValueError):
            ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,),
                      sigmoid_kind="tanh")
        with pytest.raises(ValueError):
            ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,),
                      homotopy_mu=1.5)
        with pytest.raises(ValueError):
            ModelSpec(n_modes=2, j0_sign=-1, j_weights=(1.5,))

    def test_with_gain_returns_new_spec(self):
        other = SPEC.with_gain(3.0)
        assert other.gain == 3.0 and SPEC.gain == 15.0

    def test_j_accessors(self):
        spec = ModelSpec(n_modes=2, j0_sign=-1, j_weights=(9.0, -6.66))
        assert spec.j_abs(2) == 6.66
        assert spec.j_sign(2) == -1
        assert spec.j_sign(1) == 1


class TestSigmoid:
    def test_reference_values(self):
        assert sigmoid_eval(0.0, SPEC) == 0.5
        centered = ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,),
                             sigmoid_kind="centered")
        assert sigmoid_eval(0.0, centered) == 0.0
        homo = ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,),
                         sigmoid_kind="homotopy", homotopy_mu=1.0,
                         threshold=0.1)
        assert sigmoid_eval(0.0, homo) == pytest.approx(0.4, abs=1e-15)

    def test_homotopy_endpoint_matches_thresholded_model(self):
        # at mu = 1 the deformed field equals the standard-sigmoid field for
        # either sign of the mean connectivity
        state = CortexState(-0.2, np.array([0.1 + 0.05j]))
        stim = Stimulus.off(SPEC)
        for j0_sign in (-1, 1):
            std = ModelSpec(n_modes=1, j0_sign=j0_sign, j_weights=(1.5,),
                            gain=4.0, threshold=0.2)
            homo = ModelSpec(n_modes=1, j0_sign=j0_sign, j_weights=(1.5,),
                             gain=4.0, threshold=0.2, sigmoid_kind="homotopy",
                             homotopy_mu=1.0)
            a = galerkin_rhs(state, stim, std)
            b = galerkin_rhs(state, stim, homo)
            assert a.v0 == pytest.approx(b.v0, abs=1e-12)
            assert np.allclose(a.z, b.z, atol=1e-12)


class TestStimulus:
    def test_lgn_coefficients(self):
        stim = make_lgn_stimulus(0.1, 0.3, 0.01, SPEC)
        assert stim.i0 == pytest.approx(0.9)
        assert stim.i_k[0] == pytest.approx(
            0.1 / math.sqrt(1.5) * np.exp(2j * 0.3))

    def test_drive_profile_matches_closed_form(self):
        beta, x0 = 0.1, 0.4
        stim = make_lgn_stimulus(beta, x0, 1.0, SPEC)
        x = np.linspace(-math.pi / 2, math.pi / 2, 33)
        want = 1.0 - beta + beta * np.cos(2.0 * (x - x0))
        assert np.allclose(stimulus_drive(stim, SPEC, x), want, atol=1e-12)

    def test_schedule_is_used(self):
        base = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
        stim = Stimulus(base.i0, base.i_k, 0.01,
                        schedule=lambda t: (base.i0, base.i_k, 0.0 if t > 1 else 0.01))
        assert stim.at(0.0)[2] == 0.01
        assert stim.at(2.0)[2] == 0.0

    def test_off(self):
        i0, i_k, eps = Stimulus.off(SPEC).at(0.0)
        assert eps == 0.0 and i0 == 0.0 and np.all(i_k == 0)


class TestGeometry:
    def test_peak_angle_matches_voltage_maximum(self):
        state = CortexState(-0.1, np.array([0.2 * np.exp(2j * 0.7)]))
        x = np.linspace(-math.pi / 2, math.pi / 2, 20001)
        v = reconstruct_voltage(state, SPEC, x)
        x_max = x[np.argmax(v)] % math.pi
        assert x_max == pytest.approx(state.peak_angle(), abs=1e-3)

    def test_group_action_rotation_and_reflection(self):
        spec = ModelSpec(n_modes=2, j0_sign=-1, j_weights=(9.0, 6.66))
        state = CortexState(0.1, np.array([0.2 + 0.1j, 0.05 - 0.02j]))
        x = np.linspace(-math.pi / 2, math.pi / 2, 64, endpoint=False)
        gamma = 0.37
        rotated = group_act(state, gamma)
        assert np.allclose(reconstruct_voltage(rotated, spec, x),
                           reconstruct_voltage(state, spec, x - gamma),
                           atol=1e-12)
        reflected = group_act(state, 0.0, reflect=True)
        assert np.allclose(reconstruct_voltage(reflected, spec, x),
                           reconstruct_voltage(state, spec, -x), atol=1e-12)

    def test_activity_is_sigmoid_of_voltage(self):
        state = CortexState(-0.1, np.array([0.2 + 0.1j]))
        x = np.linspace(-1.0, 1.0, 11)
        v = reconstruct_voltage(state, SPEC, x)
        act = reconstruct_activity(state, SPEC, None, x)
        assert np.allclose(act, 1.0 / (1.0 + np.exp(-SPEC.gain * v)))

    def test_state_vector_round_trip(self):
        state = CortexState(0.3, np.array([0.2 + 0.1j, -0.4 + 0.05j]))
        back = CortexState.from_vector(state.to_vector())
        assert back.v0 == state.v0 and np.array_equal(back.z, state.z)


class TestIntegration:
    def test_pure_decay_at_zero_gain(self):
        spec = ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,), gain=0.0,
                         sigmoid_kind="centered")
        state0 = CortexState(0.5, np.array([0.3 + 0.1j]))
        traj = integrate(state0, Stimulus.off(spec), spec, 2.0, dt=0.001,
                         sample_every=10 ** 9)
        decay = math.exp(-2.0 / spec.time_constant)
        assert traj.final().v0 == pytest.approx(0.5 * decay, rel=1e-9)
        assert traj.final().z[0] == pytest.approx((0.3 + 0.1j) * decay,
                                                 rel=1e-9)

    def test_trajectory_csv(self, tmp_path):
        state0 = CortexState(0.0, np.array([0.1 + 0j]))
        stim = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
        traj = integrate(state0, stim, SPEC, 1.0, dt=0.1, sample_every=2)
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,v0,re_z1,im_z1,peak_angle"
        assert len(lines) == len(traj.times) + 1

    def test_rhs_vector_matches_galerkin_rhs(self):
        state = CortexState(-0.2, np.array([0.1 + 0.05j]))
        stim = make_lgn_stimulus(0.1, 0.2, 0.01, SPEC)
        d = galerkin_rhs(state, stim, SPEC)
        vec = rhs_vector(state.to_vector(), stim, SPEC)
        assert vec[0] == d.v0
        assert vec[1] + 1j * vec[2] == d.z[0]


class TestRingDiscretization:
    def test_projection_round_trip(self):
        spec = ModelSpec(n_modes=2, j0_sign=-1, j_weights=(9.0, 6.66))
        state = CortexState(-0.3, np.array([0.2 + 0.1j, -0.1 + 0.04j]))
        x = model.ring_grid(64)
        back = model.project_ring_state(reconstruct_voltage(state, spec, x),
                                        spec)
        assert back.v0 == pytest.approx(state.v0, abs=1e-12)
        assert np.allclose(back.z, state.z, atol=1e-12)

    def test_grid_size_guard(self):
        spec = ModelSpec(n_modes=2, j0_sign=-1, j_weights=(9.0, 6.66))
        with pytest.raises(ValueError):
            model.full_ring_simulate(np.zeros(8), Stimulus.off(spec), spec,
                                     1.0)

    def test_connectivity_kernel_profile(self):
        spec = ModelSpec(n_modes=2, j0_sign=-1, j_weights=(9.0, -6.66))
        x = np.linspace(-math.pi / 2, math.pi / 2, 17)
        want = -1.0 + 9.0 * np.cos(2 * x) - 6.66 * np.cos(4 * x)
        assert np.allclose(model.connectivity_kernel(spec, x), want)


def test_polar_phase_raises_at_origin():
    stim = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
    from ringlab.ring1 import PolarState, polar_rhs
    with pytest.raises(RingModelError):
        polar_rhs(PolarState(0.0, 0.0, 0.0), stim, SPEC)
