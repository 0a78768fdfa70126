"""Figure rendering for CLI reports.

Each helper takes an analysis object plus an output path and writes a PNG;
the CLI calls these right after the matching CSV export so every delimited
file ships with a rendered view.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_branch(branch, path, component=1, param_name="lambda",
                ylabel=None, title=None):
    """Bifurcation diagram: one state component against the continuation
    parameter, stable segments solid, unstable dashed, folds marked."""
    params = np.array([p.params[param_name] for p in branch.points])
    vals = np.array([p.state[component] for p in branch.points])
    stable = np.array([p.n_unstable == 0 if p.n_unstable is not None else False
                       for p in branch.points])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(params, vals, color="0.8", lw=0.8, zorder=1)
    if stable.any():
        ax.plot(np.where(stable, params, np.nan), np.where(stable, vals, np.nan),
                "b-", lw=1.6, label="stable")
    if (~stable).any():
        ax.plot(np.where(~stable, params, np.nan), np.where(~stable, vals, np.nan),
                "r--", lw=1.2, label="unstable")
    for sp in branch.special_points:
        if sp.kind == "fold":
            ax.plot(sp.params[param_name], sp.state[component], "ko", ms=6,
                    mfc="none", label="fold")
    ax.set_xlabel(param_name)
    ax.set_ylabel(ylabel or f"state[{component}]")
    if title:
        ax.set_title(title)
    handles, labels = ax.get_legend_handles_labels()
    seen = dict(zip(labels, handles))
    if seen:
        ax.legend(seen.values(), seen.keys(), loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_threshold_map(boundary, path):
    """Existence boundary of tuned states in the (theta, J1) plane."""
    thetas = np.array([s[0] for s in boundary.samples])
    j1s = np.array([s[1] for s in boundary.samples])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(thetas, j1s, "k.-", lw=1.2)
    ok = np.isfinite(j1s)
    if ok.any():
        ax.fill_between(thetas[ok], j1s[ok], np.nanmax(j1s[ok]) * 1.1,
                        alpha=0.15, color="C0", label="tuned states exist")
    ax.set_xlabel("threshold")
    ax.set_ylabel("minimal J1")
    ax.set_title(f"existence boundary (eps0 = {boundary.eps0:+d})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_profiles(x, curves, path, ylabel="activity", title=None):
    """Overlay of orientation profiles; ``curves`` maps label -> samples."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in curves.items():
        ax.plot(np.degrees(x), y, lw=1.4, label=label)
    ax.set_xlabel("orientation (deg)")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fold_locus(branch, path, p1="epsilon", p2="lambda"):
    """Two-parameter fold curve."""
    xs = np.array([pt.params[p2] for pt in branch.points])
    ys = np.array([pt.params[p1] for pt in branch.points])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, "C3.-", lw=1.2, ms=3)
    ax.set_xlabel(p2)
    ax.set_ylabel(p1)
    ax.set_title("fold locus")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_illusion(traj, path, title=None):
    """Peak orientation and tuning amplitude against time for one protocol."""
    angles = traj.peak_angles()
    rho = np.array([abs(s.z[0]) for s in traj.states])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(traj.times, np.degrees(angles), "C0.", ms=2)
    ax1.set_ylabel("peak angle (deg)")
    ax1.set_ylim(-5, 185)
    ax1.axhline(90, color="0.7", lw=0.8)
    ax2.plot(traj.times, rho, "C1-", lw=1.2)
    ax2.set_ylabel("|z1|")
    ax2.set_xlabel("time")
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ring_comparison(x, v_direct, v_reduced, path):
    """Direct grid simulation against the reduced reconstruction."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.degrees(x), v_direct, "k-", lw=1.6, label="grid simulation")
    ax.plot(np.degrees(x), v_reduced, "C1--", lw=1.4, label="mode reconstruction")
    ax.set_xlabel("orientation (deg)")
    ax.set_ylabel("V")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
