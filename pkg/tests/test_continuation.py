"""Unit tests for the continuation and homotopy machinery."""

import json
import math

import numpy as np
import pytest

from ringlab import continuation, model, ring1
from ringlab.continuation import (ContinuationConfig, NewtonError,
                                  NotAnEquilibriumError, continue_branch,
                                  fd_jacobian, homotopy_start, newton_solve,
                                  stability)
from ringlab.model import CortexState, ModelSpec, Stimulus

N1_SPEC = ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,), gain=15.0)


class TestNewton:
    def test_solves_quadratic_system(self):
        def res(u):
            return np.array([u[0] ** 2 + u[1] - 3.0, u[0] - u[1]])

        u = newton_solve(res, np.array([1.0, 1.0]),
                         ContinuationConfig(newton_tol=1e-13))
        assert np.allclose(res(u), 0.0, atol=1e-12)

    def test_raises_without_root(self):
        with pytest.raises(NewtonError):
            newton_solve(lambda u: np.array([u[0] ** 2 + 1.0]),
                         np.array([1.0]), ContinuationConfig())

    def test_fd_jacobian_accuracy(self):
        def res(u):
            return np.array([math.sin(u[0]) + u[1] ** 2, u[0] * u[1]])

        u = np.array([0.4, -0.7])
        want = np.array([[math.cos(0.4), -1.4], [-0.7, 0.4]])
        assert np.allclose(fd_jacobian(res, u, 1e-6), want, atol=1e-8)


class TestForcedPitchforkNormalForm:
    """u' = lam u - u^3 + f has a fold on its disconnected branch at
    lam = 3 (f/2)^(2/3), u = -(f/2)^(1/3)."""

    F = 0.01

    def residual(self, u, lam):
        return np.array([lam * u[0] - u[0] ** 3 + self.F])

    def test_fold_location_and_refinement(self):
        lam0 = 2.0
        u0 = newton_solve(lambda u: self.residual(u, lam0),
                          np.array([-1.4]), ContinuationConfig())
        branch = continue_branch(
            self.residual, u0, lam0, (-1.0, 2.5),
            ContinuationConfig(ds=0.05, ds_max=0.2, max_steps=400),
            direction=-1)
        folds = branch.folds()
        assert len(folds) == 1
        fold = folds[0]
        lam_exact = 3.0 * (self.F / 2.0) ** (2.0 / 3.0)
        u_exact = -((self.F / 2.0) ** (1.0 / 3.0))
        assert fold.params["lambda"] == pytest.approx(lam_exact, abs=1e-6)
        assert fold.state[0] == pytest.approx(u_exact, abs=1e-4)
        # rank deficiency at the refined fold
        jac = fd_jacobian(lambda u: self.residual(u, fold.params["lambda"]),
                          fold.state, 1e-7)
        assert np.min(np.abs(np.linalg.svd(jac)[1])) < 1e-6

    def test_branch_export(self, tmp_path):
        u0 = newton_solve(lambda u: self.residual(u, 2.0), np.array([-1.4]),
                          ContinuationConfig())
        branch = continue_branch(
            self.residual, u0, 2.0, (0.5, 2.5),
            ContinuationConfig(ds=0.05, max_steps=100), direction=-1)
        csv = tmp_path / "branch.csv"
        branch.to_csv(csv, state_labels=["u"])
        lines = csv.read_text().strip().splitlines()
        assert lines[0] == "step,lambda,u,n_unstable,is_fold"
        assert len(lines) == len(branch.points) + 1
        meta = tmp_path / "branch.json"
        branch.sidecar(meta, metadata={"tag": 1})
        doc = json.loads(meta.read_text())
        assert doc["metadata"] == {"tag": 1}


class TestStability:
    def test_counts_unstable_directions(self):
        stim = model.make_lgn_stimulus(0.1, 0.0, 0.01, N1_SPEC)
        res = ring1.polar_equilibrium_residual(N1_SPEC, stim, "even")
        u = newton_solve(res, np.array([-0.19, 0.18]),
                         ContinuationConfig(newton_tol=1e-12))
        state = CortexState(u[0], np.array([u[1] + 0j]))
        n_unstable, lead = stability(state, stim, N1_SPEC)
        assert n_unstable == 0 and lead < 0

    def test_rejects_non_equilibrium(self):
        stim = model.make_lgn_stimulus(0.1, 0.0, 0.01, N1_SPEC)
        state = CortexState(0.4, np.array([0.5 + 0j]))
        with pytest.raises(NotAnEquilibriumError):
            stability(state, stim, N1_SPEC)


class TestHomotopyStart:
    def test_finds_unforced_equilibria(self):
        results = dict(homotopy_start(N1_SPEC, 15.0))
        assert set(results) == {"trivial", "mode1+", "mode1-"}
        stim = Stimulus.off(N1_SPEC)
        for state in results.values():
            r = model.rhs_vector(state.to_vector(), stim, N1_SPEC)
            assert np.linalg.norm(r) <= 1e-10

        # agreement with direct Newton on the final model
        res = ring1.polar_equilibrium_residual(N1_SPEC, stim, "even")
        cfg = ContinuationConfig(newton_tol=1e-13)
        for name, seed in (("trivial", [-0.13, 0.0]),
                           ("mode1+", [-0.18, 0.16]),
                           ("mode1-", [-0.18, -0.16])):
            u = newton_solve(res, np.array(seed), cfg)
            state = results[name]
            assert abs(state.v0 - u[0]) <= 1e-8
            assert abs(state.z[0] - u[1]) <= 1e-8

        tuned = abs(results["mode1+"].z[0])
        assert tuned > 0.1
        assert results["trivial"].z[0] == pytest.approx(0.0, abs=1e-10)
