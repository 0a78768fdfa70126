"""Command-line front end.

Every subcommand reads an optional JSON config (strictly validated against the
command's template: unknown keys are rejected), writes its delimited outputs
and rendered figures under --out, and emits a manifest.json echoing the fully
resolved configuration plus the artifact list. Validation problems exit with
status 2, numerical failures with status 3 (diagnostics land in the manifest).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import continuation, illusions, model, orbit, report, ring1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config handling

MODEL_TEMPLATE = {
    "n_modes": 1,
    "j0_sign": -1,
    "j_weights": [1.5],
    "gain": 15.0,
    "theta": 0.0,
    "sigmoid_kind": "standard",
}

STIMULUS_TEMPLATE = {
    "beta": 0.1,
    "x0": 0.0,
    "epsilon": 0.01,
    "mode2_scale": 0.0,
}

TEMPLATES = {
    "simulate": {
        "model": MODEL_TEMPLATE,
        "stimulus": STIMULUS_TEMPLATE,
        "t_end": 200.0,
        "dt": 0.05,
        "sample_every": 10,
        "initial": {"v0": 0.0, "z": [[0.1, 0.0]]},
        "seed": 0,
    },
    "equilibria": {
        "model": MODEL_TEMPLATE,
        "stimulus": STIMULUS_TEMPLATE,
        "v0_range": [-1.5, 0.5],
        "rho_range": [-1.5, 1.5],
        "n_grid": 30,
        "seed": 0,
    },
    "continue": {
        "model": MODEL_TEMPLATE,
        "stimulus": STIMULUS_TEMPLATE,
        "parity": "even",
        "lambda_start": 6.0,
        "lambda_range": [0.5, 20.0],
        "seed_state": [0.0, 0.1],
        "direction": 1,
        "ds": 0.05,
        "max_steps": 400,
        "seed": 0,
    },
    # default seed sits on the disconnected tuned branch at high gain and
    # walks down to its fold; the locus then follows the fold toward eps -> 0
    "fold-locus": {
        "model": MODEL_TEMPLATE,
        "stimulus": STIMULUS_TEMPLATE,
        "parity": "even",
        "lambda_start": 15.0,
        "lambda_range": [5.0, 25.0],
        "seed_state": [-0.18, -0.18],
        "direction": -1,
        "epsilon_floor": 1e-4,
        "max_steps": 200,
        "seed": 0,
    },
    "threshold-map": {
        "eps0": -1,
        "theta_min": 0.0,
        "theta_max": 1.0,
        "n_theta": 21,
        "j1_max": 12.0,
        "seed": 0,
    },
    "orbit-reduce": {
        "j_weights": [9.0, 6.66],
        "j0_sign": -1,
        "gain": 1.0,
        "alpha": 14.0,
        "max_error": 0.01,
        "seed": 0,
    },
    "tuning-curve": {
        "model": MODEL_TEMPLATE,
        "stimulus": STIMULUS_TEMPLATE,
        "n_samples": 181,
        "seed": 0,
    },
    "illusion": {
        "scenario": {
            "protocol": "rotate",
            "gain": 15.0,
            "epsilon": 0.01,
            "beta": 0.1,
            "theta": 0.0,
            "j0_sign": -1,
            "j_weights": [1.5],
            "sigmoid_kind": "standard",
            "ramp_start": 0.0,
            "ramp_end": 1000.0,
            "switch_time": 20000.0,
            "t_end": 25000.0,
            "dt": 0.25,
            "settle_time": 300.0,
            "sample_every": 20,
        },
        "seed": 0,
    },
    "repro-all": {"seed": 0},
}


def merge_config(template, override, path="config"):
    """Template-guided merge; any key absent from the template is an error."""
    if not isinstance(override, dict):
        raise ConfigError(f"{path}: expected an object")
    merged = {}
    for key, default in template.items():
        if key in override:
            val = override[key]
            if isinstance(default, dict):
                merged[key] = merge_config(default, val, f"{path}.{key}")
            else:
                merged[key] = val
        else:
            merged[key] = default
    extra = set(override) - set(template)
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    return merged


def build_spec(mc):
    return model.ModelSpec(
        n_modes=int(mc["n_modes"]), j0_sign=int(mc["j0_sign"]),
        j_weights=tuple(mc["j_weights"]), gain=float(mc["gain"]),
        threshold=float(mc["theta"]), sigmoid_kind=mc["sigmoid_kind"])


def build_stimulus(sc, spec):
    return model.make_lgn_stimulus(float(sc["beta"]), float(sc["x0"]),
                                   float(sc["epsilon"]), spec,
                                   mode2_scale=float(sc["mode2_scale"]))


# ---------------------------------------------------------------------------
# subcommand runners: each returns a list of artifact names (relative to out)


def run_simulate(cfg, out):
    spec = build_spec(cfg["model"])
    stim = build_stimulus(cfg["stimulus"], spec)
    init = cfg["initial"]
    z = np.array([complex(re, im) for re, im in init["z"]])
    if z.size != spec.n_modes:
        raise ConfigError("initial.z must have n_modes entries")
    state0 = model.CortexState(float(init["v0"]), z)
    traj = model.integrate(state0, stim, spec, float(cfg["t_end"]),
                           dt=float(cfg["dt"]),
                           sample_every=int(cfg["sample_every"]))
    traj.to_csv(out / "trajectory.csv")
    report.plot_illusion(traj, out / "trajectory.png", title="simulation")
    return ["trajectory.csv", "trajectory.png"]


def run_equilibria(cfg, out):
    spec = build_spec(cfg["model"])
    stim = build_stimulus(cfg["stimulus"], spec)
    found = ring1.find_equilibria_grid(
        spec, stim, v0_range=tuple(cfg["v0_range"]),
        rho_range=tuple(cfg["rho_range"]), n_grid=int(cfg["n_grid"]))
    x = np.linspace(-math.pi / 2, math.pi / 2, 181)
    curves = {}
    with open(out / "equilibria.csv", "w") as fh:
        fh.write("v0,rho,n_unstable\n")
        for i, (v0, rho) in enumerate(found):
            state = model.CortexState(v0, np.array([rho + 0j]))
            nu, _ = continuation.stability(state, stim, spec)
            fh.write(f"{v0:.12g},{rho:.12g},{nu}\n")
            curves[f"eq{i} (rho={rho:.3f}, {'stable' if nu == 0 else 'unstable'})"] = \
                model.reconstruct_activity(state, spec, stim, x)
    if curves:
        report.plot_profiles(x, curves, out / "equilibria.png",
                             title="equilibrium activity profiles")
        return ["equilibria.csv", "equilibria.png"]
    return ["equilibria.csv"]


def _stability_fn(spec, stim):
    def fn(u, lam):
        state = model.CortexState(u[0], np.array([u[1] + 0j]))
        try:
            nu, _ = continuation.stability(state, stim, spec.with_gain(lam))
        except continuation.NotAnEquilibriumError:
            return -1
        return nu
    return fn


def run_continue(cfg, out):
    spec = build_spec(cfg["model"])
    stim = build_stimulus(cfg["stimulus"], spec)
    residual = ring1.forced_residual_lambda(spec, stim, cfg["parity"])
    ccfg = continuation.ContinuationConfig(
        ds=float(cfg["ds"]), ds_max=4 * float(cfg["ds"]),
        max_steps=int(cfg["max_steps"]))
    lam0 = float(cfg["lambda_start"])
    branch = continuation.continue_branch(
        residual, np.array(cfg["seed_state"], dtype=float), lam0,
        tuple(cfg["lambda_range"]), ccfg,
        stability_fn=_stability_fn(spec, stim),
        direction=int(cfg["direction"]))
    branch.to_csv(out / "branch.csv", state_labels=["v0", "rho"])
    branch.sidecar(out / "branch_meta.json", metadata={"parity": cfg["parity"]})
    report.plot_branch(branch, out / "branch.png", component=1, ylabel="rho",
                       title=f"{cfg['parity']} family")
    return ["branch.csv", "branch_meta.json", "branch.png"]


def run_fold_locus(cfg, out):
    spec = build_spec(cfg["model"])
    stim = build_stimulus(cfg["stimulus"], spec)
    eps = float(cfg["stimulus"]["epsilon"])
    beta = float(cfg["stimulus"]["beta"])
    residual = ring1.forced_residual_lambda(spec, stim, cfg["parity"])
    ccfg = continuation.ContinuationConfig(ds=0.05, ds_max=0.2,
                                           max_steps=int(cfg["max_steps"]))
    branch = continuation.continue_branch(
        residual, np.array(cfg["seed_state"], dtype=float),
        float(cfg["lambda_start"]), tuple(cfg["lambda_range"]), ccfg,
        direction=int(cfg["direction"]))
    folds = branch.folds()
    if not folds:
        raise model.RingModelError("no fold found on the seed branch")
    fold = folds[0]
    res2 = ring1.forced_residual_eps_lambda(spec, beta, cfg["parity"])
    locus_cfg = continuation.ContinuationConfig(
        ds=0.02, ds_max=0.05, max_steps=int(cfg["max_steps"]))
    locus = continuation.fold_locus(
        res2, fold.state, eps, fold.params["lambda"], locus_cfg,
        p1_range=(float(cfg["epsilon_floor"]), 10 * eps),
        p2_range=tuple(cfg["lambda_range"]), direction=+1)
    locus.to_csv(out / "fold_locus.csv", state_labels=["v0", "rho"])
    report.plot_fold_locus(locus, out / "fold_locus.png")
    return ["fold_locus.csv", "fold_locus.png"]


def run_threshold_map(cfg, out):
    thetas = np.linspace(float(cfg["theta_min"]), float(cfg["theta_max"]),
                         int(cfg["n_theta"]))
    boundary = ring1.threshold_boundary(
        int(cfg["eps0"]), theta_grid=thetas,
        j1_range=(0.01, float(cfg["j1_max"])))
    boundary.to_csv(out / "threshold_map.csv")
    report.plot_threshold_map(boundary, out / "threshold_map.png")
    return ["threshold_map.csv", "threshold_map.png"]


def run_orbit_reduce(cfg, out):
    spec = model.ModelSpec(
        n_modes=2, j0_sign=int(cfg["j0_sign"]),
        j_weights=tuple(cfg["j_weights"]), gain=float(cfg["gain"]),
        sigmoid_kind="centered")
    fit = orbit.chebyshev_fit(orbit.sigmoid_for_kind("centered"),
                              float(cfg["alpha"]), float(cfg["max_error"]))
    rsys = orbit.reduce_invariants(fit, spec)
    rsys.to_json(out / "invariant_poly.json", float(cfg["gain"]))
    lam1, lam2 = orbit.trivial_bifurcation_gains(rsys)
    with open(out / "bifurcation_gains.json", "w") as fh:
        json.dump({"lambda1": lam1, "lambda2": lam2,
                   "ratio": lam1 / lam2}, fh, indent=2)
    return ["invariant_poly.json", "bifurcation_gains.json"]


def run_tuning_curve(cfg, out):
    spec = build_spec(cfg["model"])
    stim = build_stimulus(cfg["stimulus"], spec)
    found = ring1.find_equilibria_grid(spec, stim, n_grid=25)
    # demand genuine tuning, not the weak modulation the anisotropic drive
    # imprints on the flat state
    tuned = [u for u in found if u[1] > 0.05]
    if not tuned:
        raise model.RingModelError("no tuned equilibrium at these parameters")
    v0, rho = max(tuned, key=lambda u: u[1])
    x = np.linspace(-math.pi / 2, math.pi / 2, int(cfg["n_samples"]))
    state = model.CortexState(v0, np.array([rho + 0j]))
    act = model.reconstruct_activity(state, spec, stim, x)
    hw = ring1.tuning_halfwidth(v0, rho ** 2, spec.gain, 0.0,
                                spec.j_weights[0])
    with open(out / "tuning_curve.csv", "w") as fh:
        fh.write("x,activity\n")
        for xi, ai in zip(x, act):
            fh.write(f"{xi:.12g},{ai:.12g}\n")
    report.plot_profiles(x, {"tuning curve": act}, out / "tuning_curve.png")
    with open(out / "tuning_meta.json", "w") as fh:
        json.dump({"v0": v0, "rho": rho,
                   "halfwidth_rad": hw, "halfwidth_deg":
                   math.degrees(hw) if hw is not None else None}, fh, indent=2)
    return ["tuning_curve.csv", "tuning_curve.png", "tuning_meta.json"]


def run_illusion(cfg, out):
    scn_doc = dict(cfg["scenario"])
    scn_doc["j_weights"] = tuple(scn_doc["j_weights"])
    scn = illusions.Scenario.from_dict(scn_doc)
    traj, rep = illusions.run_scenario(
        scn, trajectory_csv=out / "trajectory.csv",
        report_json=out / "report.json")
    report.plot_illusion(traj, out / "illusion.png",
                         title=f"{scn.protocol}: basin {rep.basin}")
    return ["trajectory.csv", "report.json", "illusion.png"]


def run_repro_all(cfg, out):
    del cfg
    artifacts = []
    jobs = [
        ("threshold-map", {}),
        ("continue", {}),
        ("fold-locus", {}),
        ("tuning-curve", {}),
        ("orbit-reduce", {}),
        ("illusion", {"scenario": {"protocol": "rotate"}}),
        ("illusion", {"scenario": {"protocol": "mixture"}}),
    ]
    for i, (name, override) in enumerate(jobs):
        sub = out / f"{i:02d}_{name.replace('-', '_')}"
        if name == "illusion" and override:
            sub = out / f"{i:02d}_illusion_{override['scenario']['protocol']}"
        sub.mkdir(parents=True, exist_ok=True)
        merged = merge_config(TEMPLATES[name], override)
        files = RUNNERS[name](merged, sub)
        write_manifest(sub, name, merged, files, "ok")
        artifacts += [f"{sub.name}/{f}" for f in files]
    return artifacts


RUNNERS = {
    "simulate": run_simulate,
    "equilibria": run_equilibria,
    "continue": run_continue,
    "fold-locus": run_fold_locus,
    "threshold-map": run_threshold_map,
    "orbit-reduce": run_orbit_reduce,
    "tuning-curve": run_tuning_curve,
    "illusion": run_illusion,
    "repro-all": run_repro_all,
}


def write_manifest(out, command, config, artifacts, status, error=None):
    doc = {
        "command": command,
        "config": config,
        "artifacts": artifacts,
        "status": status,
    }
    if error is not None:
        doc["error"] = error
    with open(out / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, default=list)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ringlab",
        description="Numerical laboratory for the ring model of orientation "
                    "tuning")
    parser.add_argument("command", choices=sorted(RUNNERS))
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON parameter document")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (created if missing)")
    parser.add_argument("--eps0", type=int, default=None,
                        help="override eps0 (threshold-map)")
    parser.add_argument("--protocol", default=None,
                        help="override the protocol (illusion)")
    args = parser.parse_args(argv)

    override = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                override = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            print(f"error: cannot read config: {err}", file=sys.stderr)
            return EXIT_VALIDATION
    if args.eps0 is not None:
        if args.command != "threshold-map":
            print("error: --eps0 only applies to threshold-map", file=sys.stderr)
            return EXIT_VALIDATION
        override["eps0"] = args.eps0
    if args.protocol is not None:
        if args.command != "illusion":
            print("error: --protocol only applies to illusion", file=sys.stderr)
            return EXIT_VALIDATION
        override.setdefault("scenario", {})["protocol"] = args.protocol

    try:
        config = merge_config(TEMPLATES[args.command], override)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    try:
        artifacts = RUNNERS[args.command](config, out)
    except (model.RingModelError, ConfigError, ValueError) as err:
        write_manifest(out, args.command, config, [], "failed", str(err))
        print(f"error: {err}", file=sys.stderr)
        return (EXIT_VALIDATION if isinstance(err, ConfigError)
                else EXIT_NUMERICAL)
    write_manifest(out, args.command, config, artifacts, "ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
