"""Unit tests for the command-line front end."""

import json

import pytest

from ringlab import cli
from ringlab.cli import (EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION,
                         ConfigError, merge_config)


class TestConfigMerge:
    def test_defaults_pass_through(self):
        merged = merge_config(cli.TEMPLATES["simulate"], {})
        assert merged["t_end"] == 200.0
        assert merged["model"]["j_weights"] == [1.5]

    def test_nested_override(self):
        merged = merge_config(cli.TEMPLATES["simulate"],
                              {"model": {"gain": 3.0}})
        assert merged["model"]["gain"] == 3.0
        assert merged["model"]["n_modes"] == 1

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            merge_config(cli.TEMPLATES["simulate"], {"tend": 10.0})
        with pytest.raises(ConfigError, match="unknown keys"):
            merge_config(cli.TEMPLATES["simulate"],
                         {"model": {"weights": [1.0]}})

    def test_non_object_rejected(self):
        with pytest.raises(ConfigError):
            merge_config(cli.TEMPLATES["simulate"], {"model": 3})


class TestMain:
    def write_config(self, tmp_path, doc):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        return str(path)

    def test_simulate_writes_artifacts_and_manifest(self, tmp_path):
        cfg = self.write_config(tmp_path, {"t_end": 5.0, "dt": 0.05})
        out = tmp_path / "out"
        code = cli.main(["simulate", "--config", cfg, "--out", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        for name in manifest["artifacts"]:
            assert (out / name).exists()
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,v0,re_z1,im_z1,peak_angle"

    def test_equilibria_quick(self, tmp_path):
        cfg = self.write_config(tmp_path, {"n_grid": 8})
        out = tmp_path / "out"
        code = cli.main(["equilibria", "--config", cfg, "--out", str(out)])
        assert code == EXIT_OK
        rows = (out / "equilibria.csv").read_text().strip().splitlines()
        assert rows[0] == "v0,rho,n_unstable"
        assert len(rows) == 4  # three equilibria at the default parameters

    def test_invalid_config_exits_2(self, tmp_path):
        cfg = self.write_config(tmp_path, {"bogus": 1})
        assert cli.main(["simulate", "--config", cfg,
                         "--out", str(tmp_path / "o")]) == EXIT_VALIDATION

    def test_unreadable_config_exits_2(self, tmp_path):
        bad = tmp_path / "nope.json"
        assert cli.main(["simulate", "--config", str(bad),
                         "--out", str(tmp_path / "o")]) == EXIT_VALIDATION

    def test_flag_scoping(self, tmp_path):
        assert cli.main(["simulate", "--eps0", "-1",
                         "--out", str(tmp_path)]) == EXIT_VALIDATION
        assert cli.main(["threshold-map", "--protocol", "rotate",
                         "--out", str(tmp_path)]) == EXIT_VALIDATION

    def test_numerical_failure_exits_3_with_manifest(self, tmp_path):
        # no tuned equilibrium exists at low gain
        cfg = self.write_config(tmp_path, {"model": {"gain": 5.0}})
        out = tmp_path / "out"
        code = cli.main(["tuning-curve", "--config", cfg, "--out", str(out)])
        assert code == EXIT_NUMERICAL
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "failed"
        assert "error" in manifest

    def test_orbit_reduce(self, tmp_path):
        out = tmp_path / "out"
        cfg = self.write_config(tmp_path, {"max_error": 0.02})
        code = cli.main(["orbit-reduce", "--config", cfg, "--out", str(out)])
        assert code == EXIT_OK
        gains = json.loads((out / "bifurcation_gains.json").read_text())
        assert gains["lambda1"] < gains["lambda2"]
        poly = json.loads((out / "invariant_poly.json").read_text())
        assert poly["metadata"]["fit_error"] <= 0.02
