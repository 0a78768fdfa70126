"""Unit tests for the single-mode analysis helpers."""

import math

import numpy as np
import pytest
from scipy.special import expit

from ringlab import ring1
from ringlab.model import ModelSpec, Stimulus, make_lgn_stimulus, rhs_vector
from ringlab.ring1 import (PolarState, halfwidth_by_rootfind,
                           pitchfork_condition, polar_equilibrium_residual,
                           polar_rhs, threshold_boundary, tuning_halfwidth)

SPEC = ModelSpec(n_modes=1, j0_sign=-1, j_weights=(1.5,), gain=15.0)


class TestPitchforkCondition:
    def test_self_consistency(self):
        lam, v0 = pitchfork_condition(1.5, 0.0, -1)
        s = expit(lam * v0)
        assert v0 == pytest.approx(-s, abs=1e-10)
        assert lam * s * (1.0 - s) * 1.5 / 2.0 == pytest.approx(1.0,
                                                                abs=1e-10)

    def test_known_value(self):
        lam, _ = pitchfork_condition(1.5, 0.0, -1)
        assert lam == pytest.approx(9.552542858880665, abs=1e-9)

    def test_none_when_threshold_too_high(self):
        assert pitchfork_condition(1.0, 3.0, -1) is None

    def test_rejects_bad_j1(self):
        with pytest.raises(ValueError):
            pitchfork_condition(-1.0, 0.0, -1)


class TestPolarDynamics:
    def test_matches_cartesian_field(self):
        stim = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
        p = PolarState(-0.2, 0.15, 0.3)
        dv0, drho, dphi = polar_rhs(p, stim, SPEC)
        z = p.rho * np.exp(2j * p.phi)
        vec = np.array([p.v0, z.real, z.imag])
        d = rhs_vector(vec, stim, SPEC)
        dz = d[1] + 1j * d[2]
        assert dv0 == pytest.approx(d[0], abs=1e-12)
        # z' = (rho' + 2 i rho phi') e^{2 i phi}
        assert drho + 2j * p.rho * dphi == pytest.approx(
            dz * np.exp(-2j * p.phi), abs=1e-12)

    def test_phase_rotates_toward_stimulus(self):
        stim = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
        _, _, dphi = polar_rhs(PolarState(-0.18, 0.18, 0.4), stim, SPEC)
        assert dphi < 0

    def test_even_and_odd_families_differ_by_forcing_sign(self):
        stim = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
        u = np.array([-0.2, 0.1])
        even = polar_equilibrium_residual(SPEC, stim, "even")(u)
        odd = polar_equilibrium_residual(SPEC, stim, "odd")(u)
        assert even[0] == odd[0]
        force = 2 * 0.01 * 0.1 / math.sqrt(1.5)
        assert even[1] - odd[1] == pytest.approx(force, abs=1e-14)

    def test_parity_validation(self):
        stim = Stimulus.off(SPEC)
        with pytest.raises(ValueError):
            polar_equilibrium_residual(SPEC, stim, "mixed")


class TestExistenceScan:
    def test_scan_capped_below_corner_finds_nothing(self):
        grid = np.linspace(0.05, 5.0, 100)  # 8 / 1.5 = 5.33
        assert not ring1._tuned_state_exists(1.5, 0.0, -1, grid)

    def test_scan_past_corner_finds_tuned_state(self):
        grid = np.linspace(0.05, 30.0, 1200)
        assert ring1._tuned_state_exists(1.5, 0.0, -1, grid)

    def test_boundary_reports_nan_when_out_of_range(self):
        boundary = threshold_boundary(-1, theta_grid=[1.0],
                                      j1_range=(0.01, 2.0))
        assert math.isnan(boundary.samples[0][1])

    def test_boundary_csv(self, tmp_path):
        boundary = threshold_boundary(-1, theta_grid=[0.0],
                                      j1_range=(0.01, 4.0))
        path = tmp_path / "b.csv"
        boundary.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "theta,j1_min,eps0"
        assert lines[1].endswith(",-1")


class TestHalfwidth:
    def test_agrees_with_rootfind(self):
        hw = tuning_halfwidth(-0.18, 0.18 ** 2, 15.0, 0.0, 1.5)
        ref = halfwidth_by_rootfind(-0.18, 0.18 ** 2, 15.0, 0.0, 1.5)
        assert hw == pytest.approx(ref, abs=1e-10)

    def test_none_when_profile_stays_high(self):
        # tiny modulation on a strongly depolarized profile never reaches
        # half of its peak value
        assert tuning_halfwidth(2.0, 1e-6, 1.0, 0.0, 1.5) is None

    def test_guards(self):
        with pytest.raises(ValueError):
            tuning_halfwidth(-0.18, 0.0, 15.0, 0.0, 1.5)


def test_equilibrium_census_is_sorted_and_deduplicated():
    stim = make_lgn_stimulus(0.1, 0.0, 0.01, SPEC)
    found = ring1.find_equilibria_grid(SPEC, stim, n_grid=12)
    rhos = [u[1] for u in found]
    assert rhos == sorted(rhos)
    assert len(found) == 3
    for i in range(len(found) - 1):
        assert np.linalg.norm(np.array(found[i]) - found[i + 1]) > 1e-3
