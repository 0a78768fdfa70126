"""Newton solving, linear stability, and pseudo-arclength continuation.

The engine is generic: a system is a residual F(u, p) with u a real vector and
p a scalar parameter. Branches are traced with a secant predictor and a Newton
corrector on the residual augmented with the arclength condition. Folds are
detected through sign changes of the parameter component of the tangent and
refined by bisection in arclength. A Moore-Spence augmented system turns a
refined fold into a seed for two-parameter fold-locus continuation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import RingModelError, Stimulus, rhs_vector


class NewtonError(RingModelError):
    """Newton iteration failed to converge."""


class SingularJacobianError(NewtonError):
    """Jacobian numerically singular; likely near a bifurcation."""


class NotAnEquilibriumError(RingModelError):
    pass


@dataclass(frozen=True)
class ContinuationConfig:
    ds: float = 0.02
    ds_min: float = 1e-7
    ds_max: float = 0.2
    newton_tol: float = 1e-10
    newton_max_iters: int = 30
    max_steps: int = 600
    fd_step: float = 1e-6
    condition_limit: float = 1e13
    stability_margin: float = 1e-8

    def __post_init__(self):
        if not 0 < self.ds_min <= self.ds <= self.ds_max:
            raise ValueError("need 0 < ds_min <= ds <= ds_max")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be > 0")


@dataclass
class BranchPoint:
    params: dict
    state: np.ndarray
    n_unstable: int | None = None

    @property
    def stable(self):
        return None if self.n_unstable is None else self.n_unstable == 0


@dataclass
class SpecialPoint:
    index: int
    kind: str  # fold | branch_point | start
    params: dict
    state: np.ndarray | None = None


@dataclass
class Branch:
    """Ordered continuation output with special-point markers."""

    points: list = field(default_factory=list)
    special_points: list = field(default_factory=list)
    termination: str = ""

    def param(self, name):
        return np.array([pt.params[name] for pt in self.points])

    def states(self):
        return np.array([pt.state for pt in self.points])

    def folds(self):
        return [sp for sp in self.special_points if sp.kind == "fold"]

    def to_csv(self, path, state_labels=None):
        """CSV export: step,param...,state...,n_unstable,is_fold."""
        if not self.points:
            raise ValueError("empty branch")
        pnames = list(self.points[0].params)
        n = len(self.points[0].state)
        labels = state_labels or [f"u{i}" for i in range(n)]
        fold_idx = {sp.index for sp in self.folds()}
        with open(path, "w") as fh:
            fh.write("step," + ",".join(pnames) + "," + ",".join(labels)
                     + ",n_unstable,is_fold\n")
            for i, pt in enumerate(self.points):
                nu = pt.n_unstable if pt.n_unstable is not None else -1
                row = ([str(i)] + [f"{pt.params[p]:.12g}" for p in pnames]
                       + [f"{v:.12g}" for v in pt.state]
                       + [str(nu), str(int(i in fold_idx))])
                fh.write(",".join(row) + "\n")

    def sidecar(self, path, metadata=None):
        doc = {
            "metadata": metadata or {},
            "termination": self.termination,
            "special_points": [
                {"index": sp.index, "kind": sp.kind, "params": sp.params}
                for sp in self.special_points
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)


def fd_jacobian(fun, u, fd_step=1e-6):
    """Central-difference Jacobian, step scaled by 1 + |u|."""
    u = np.asarray(u, dtype=float)
    n = u.size
    f0 = np.atleast_1d(fun(u))
    jac = np.empty((f0.size, n))
    h = fd_step * (1.0 + np.linalg.norm(u))
    for i in range(n):
        up, um = u.copy(), u.copy()
        up[i] += h
        um[i] -= h
        jac[:, i] = (np.atleast_1d(fun(up)) - np.atleast_1d(fun(um))) / (2.0 * h)
    return jac


def newton_solve(residual, guess, cfg=None, jacobian=None):
    """Damped Newton iteration; returns u with |residual(u)|_inf <= newton_tol.

    Step halving (up to 8 times) on residual increase. Raises
    SingularJacobianError when the Jacobian condition estimate blows up,
    NewtonError when out of iterations.
    """
    cfg = cfg or ContinuationConfig()
    u = np.asarray(guess, dtype=float).copy()
    r = np.atleast_1d(residual(u))
    for _ in range(cfg.newton_max_iters):
        nr = np.max(np.abs(r))
        if nr <= cfg.newton_tol:
            return u
        jac = jacobian(u) if jacobian is not None else fd_jacobian(residual, u, cfg.fd_step)
        if np.linalg.cond(jac) > cfg.condition_limit:
            raise SingularJacobianError(
                f"Jacobian condition above {cfg.condition_limit:g} (residual {nr:.3g})")
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        for _ in range(8):
            u_try = u + lam * step
            r_try = np.atleast_1d(residual(u_try))
            if np.all(np.isfinite(r_try)) and np.max(np.abs(r_try)) < nr:
                break
            lam *= 0.5
        u, r = u_try, r_try
    if np.max(np.abs(r)) <= cfg.newton_tol:
        return u
    raise NewtonError(f"no convergence in {cfg.newton_max_iters} iterations "
                      f"(residual {np.max(np.abs(r)):.3g})")


def stability(state, stim, spec, tol=1e-9, margin=1e-8, nonlinearity=None):
    """(n_unstable, leading eigenvalue real part) of the reduced linearization.

    ``state`` must be an equilibrium within 10 * tol. The Jacobian is the
    central-difference linearization of the reduced vector field in real
    coordinates (dimension 2N + 1); eigenvalues with real part above
    ``margin`` count as unstable.
    """
    vec = state.to_vector()
    fun = lambda u: rhs_vector(u, stim, spec, nonlinearity=nonlinearity)
    res = np.max(np.abs(fun(vec)))
    if res > 10.0 * tol:
        raise NotAnEquilibriumError(f"residual {res:.3g} exceeds {10 * tol:.3g}")
    jac = fd_jacobian(fun, vec)
    eigs = np.linalg.eigvals(jac)
    real = np.sort(eigs.real)[::-1]
    return int(np.sum(real > margin)), float(real[0])


def _nullspace_tangent(residual, u, p, cfg, orient=None):
    """Unit tangent of the solution curve at (u, p) via SVD nullspace."""
    n = u.size

    def ext(y):
        return residual(y[:n], y[n])

    jac = fd_jacobian(ext, np.append(u, p), cfg.fd_step)
    _, _, vt = np.linalg.svd(jac)
    t = vt[-1]
    if orient is not None and np.dot(t, orient) < 0:
        t = -t
    return t


def _corrector(residual, y_prev, tangent, ds, cfg):
    """One pseudo-arclength step of length ds from y_prev along tangent."""
    n = y_prev.size - 1

    def aug(y):
        return np.append(residual(y[:n], y[n]), np.dot(y - y_prev, tangent) - ds)

    return newton_solve(aug, y_prev + ds * tangent, cfg)


def continue_branch(residual, u0, p0, p_range, cfg=None, param_name="lambda",
                    stability_fn=None, direction=1, state_box=None,
                    detect_folds=True, fold_refine_tol=1e-8):
    """Pseudo-arclength continuation of F(u, p) = 0 in p over p_range.

    ``stability_fn(u, p) -> n_unstable`` is evaluated at every accepted point.
    ``state_box`` optionally bounds |u|_inf; leaving it terminates the branch.
    Folds are flagged where the parameter component of the secant tangent
    changes sign and refined by bisection to ``fold_refine_tol`` in arclength.
    """
    cfg = cfg or ContinuationConfig()
    p_lo, p_hi = min(p_range), max(p_range)
    u = newton_solve(lambda v: residual(v, p0), np.asarray(u0, dtype=float), cfg)
    branch = Branch()

    def accept(uvec, pval):
        nu = stability_fn(uvec, pval) if stability_fn else None
        branch.points.append(BranchPoint({param_name: float(pval)}, uvec.copy(), nu))

    accept(u, p0)
    branch.special_points.append(SpecialPoint(0, "start", {param_name: p0}, u.copy()))

    orient = np.zeros(u.size + 1)
    orient[-1] = direction
    tangent = _nullspace_tangent(residual, u, p0, cfg, orient=orient)
    if abs(tangent[-1]) < 1e-12 and direction != 0:
        # start exactly at a fold; keep the SVD orientation
        pass
    y = np.append(u, p0)
    ds = cfg.ds

    for _ in range(cfg.max_steps):
        step_ds = ds
        y_new = None
        while True:
            try:
                y_new = _corrector(residual, y, tangent, step_ds, cfg)
                break
            except NewtonError:
                step_ds *= 0.5
                if step_ds < cfg.ds_min:
                    branch.termination = "step failure at ds_min"
                    return branch
        secant = y_new - y
        new_tangent = secant / np.linalg.norm(secant)
        if detect_folds and tangent[-1] * new_tangent[-1] < 0:
            _refine_fold(residual, branch, y, tangent, step_ds, cfg,
                         param_name, fold_refine_tol)
        y, tangent = y_new, new_tangent
        accept(y[:-1], y[-1])
        ds = min(step_ds * 1.3, cfg.ds_max)
        if not p_lo <= y[-1] <= p_hi:
            branch.termination = "parameter range reached"
            return branch
        if state_box is not None and np.max(np.abs(y[:-1])) > state_box:
            branch.termination = "left the state box"
            return branch
    branch.termination = "max steps"
    return branch


def _refine_fold(residual, branch, y_prev, tangent, ds_hit, cfg, param_name, tol):
    """Bisect the arclength to the point where the parameter tangent vanishes."""
    secant0 = tangent
    lo, hi = 0.0, ds_hit
    y_fold = None
    sign0 = np.sign(tangent[-1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            y_mid = _corrector(residual, y_prev, tangent, mid, cfg)
        except NewtonError:
            break
        t_mid = _nullspace_tangent(residual, y_mid[:-1], y_mid[-1], cfg,
                                   orient=secant0)
        y_fold = y_mid
        if np.sign(t_mid[-1]) == sign0:
            lo = mid
        else:
            hi = mid
    if y_fold is not None:
        branch.special_points.append(SpecialPoint(
            len(branch.points), "fold", {param_name: float(y_fold[-1])},
            y_fold[:-1].copy()))


def fold_tangent_parameter_component(residual, u, p, cfg=None):
    """Parameter component of the branch tangent (0 at a fold)."""
    cfg = cfg or ContinuationConfig()
    return _nullspace_tangent(residual, np.asarray(u, float), p, cfg)[-1]


def jacobian_smallest_singular_values(residual_p, u, cfg=None, k=2):
    """Smallest singular values of dF/du at fixed parameter."""
    cfg = cfg or ContinuationConfig()
    jac = fd_jacobian(residual_p, np.asarray(u, float), cfg.fd_step)
    return np.linalg.svd(jac, compute_uv=False)[-k:]


# ---------------------------------------------------------------------------
# two-parameter fold-locus continuation (Moore-Spence)


def fold_locus(residual2, fold_state, p1_seed, p2_seed, cfg=None,
               param_names=("epsilon", "lambda"), p1_range=(0.0, 1.0),
               p2_range=(0.0, 50.0), direction=-1, max_steps=None):
    """Continue the locus of folds of F(u, p1, p2) = 0 in the (p1, p2) plane.

    ``residual2(u, p1, p2)`` is the underlying system, ``fold_state`` a refined
    fold at (p1_seed, p2_seed). The Moore-Spence augmented unknown is
    (u, nullvector, p1) continued in p2: residual = 0, J . nullvector = 0 and a
    fixed-functional normalization of the nullvector. ``direction`` picks the
    initial sense of the p1 component. Returns a Branch whose points carry both
    parameters.
    """
    cfg = cfg or ContinuationConfig()
    u0 = np.asarray(fold_state, dtype=float)
    n = u0.size

    def res_fixed(u, p1, p2):
        return residual2(u, p1, p2)

    # seed nullvector from the SVD of the state Jacobian
    jac = fd_jacobian(lambda u: res_fixed(u, p1_seed, p2_seed), u0, cfg.fd_step)
    _, _, vt = np.linalg.svd(jac)
    phi0 = vt[-1]
    e_ref = phi0.copy()

    def jac_apply(u, p1, p2, phi):
        h = cfg.fd_step * (1.0 + np.linalg.norm(u))
        return (res_fixed(u + h * phi, p1, p2) - res_fixed(u - h * phi, p1, p2)) / (2.0 * h)

    def ms_residual(big, p2):
        u, phi, p1 = big[:n], big[n:2 * n], big[2 * n]
        return np.concatenate([
            res_fixed(u, p1, p2),
            jac_apply(u, p1, p2, phi),
            [np.dot(e_ref, phi) - 1.0],
        ])

    big0 = np.concatenate([u0, phi0 / np.dot(e_ref, phi0), [p1_seed]])
    p1_name, p2_name = param_names
    ms_cfg = cfg
    try:
        raw = continue_branch(
            ms_residual, big0, p2_seed, p2_range, ms_cfg, param_name=p2_name,
            direction=direction, detect_folds=False)
    except SingularJacobianError as err:
        raise RingModelError(f"augmented Jacobian singular at seed: {err}") from err

    locus = Branch(termination=raw.termination)
    for i, pt in enumerate(raw.points):
        p1 = float(pt.state[2 * n])
        locus.points.append(BranchPoint(
            {p1_name: p1, p2_name: pt.params[p2_name]}, pt.state[:n].copy()))
        if not p1_range[0] <= p1 <= p1_range[1]:
            locus.termination = f"{p1_name} range reached"
            break
    for sp in raw.special_points:
        if sp.kind == "start":
            locus.special_points.append(sp)
    return locus


# ---------------------------------------------------------------------------
# mu-homotopy start-up


def homotopy_start(spec, lambda_target, cfg=None, lambda_min=0.05,
                   include_trivial=True):
    """Equilibria of the thresholded standard model found by mu-homotopy.

    Strategy: with the centered nonlinearity (mu = 0) the zero state solves the
    system for every gain. Its branch points in the gain sit where an
    eigenvalue -1 + lambda S0'(0) J_k / 2 crosses zero, i.e. lambda_k = 8/J_k
    for positive J_k. For each crossing below ``lambda_target`` we step onto
    the bifurcated branch along the critical eigenvector (both signs), continue
    it in the gain up to lambda_target at mu = 0, then continue in mu from 0 to
    1 at fixed gain. The mu = 1 slice solves the true model. Returns a list of
    (label, CortexState) equilibria at (lambda_target, mu=1).
    """
    from .model import CortexState
    from dataclasses import replace

    cfg = cfg or ContinuationConfig()
    base = replace(spec, sigmoid_kind="centered")
    stim = Stimulus.off(spec)
    n = spec.n_modes
    dim = n + 1
    shift = 0.5 * spec.j0_sign - spec.threshold

    def residual_mu(u, mu, lam):
        # Work in the real section z_k in R (the rotation orbit of every
        # equilibrium is pinned to phase 0 or pi/2 via the sign of z_k), else
        # the O(2) phase degeneracy makes every Jacobian singular at eps = 0.
        # The mu-deformation only translates the v0 equation, so mu stays a
        # plain scalar and may run slightly past [0, 1] during continuation.
        vec = np.zeros(2 * n + 1)
        vec[0] = u[0]
        vec[1::2] = u[1:]
        r = rhs_vector(vec, stim, replace(base, gain=lam))
        r[0] += mu * shift / spec.time_constant
        return np.concatenate([[r[0]], r[1::2]])

    def unpack(u):
        return CortexState(u[0], u[1:].astype(complex))

    # (ii) branch points of the trivial branch in the gain
    crossings = []
    for k in range(1, n + 1):
        jk = spec.j_weights[k - 1]
        if jk > 0:
            lam_k = 8.0 / jk
            if lambda_min < lam_k < lambda_target:
                crossings.append((lam_k, k))
    crossings.sort()

    results = []
    if include_trivial:
        u_triv = newton_solve(lambda u: residual_mu(u, 0.0, lambda_target),
                              np.zeros(dim), cfg)
        u_final = _continue_in_mu(residual_mu, u_triv, lambda_target, cfg)
        results.append(("trivial", unpack(u_final)))

    for lam_k, k in crossings:
        for sign in (+1.0, -1.0):
            # (iii) switch onto the bifurcated branch: seed slightly past the
            # crossing along the critical eigenvector (real part of z_k)
            lam_seed = lam_k * 1.05
            guess = np.zeros(dim)
            guess[k] = sign * 0.2
            try:
                u_seed = newton_solve(lambda u: residual_mu(u, 0.0, lam_seed),
                                      guess, cfg)
            except NewtonError as err:
                raise RingModelError(
                    f"branch switch failed at lambda={lam_k:g} sign={sign:+g}"
                ) from err
            if np.max(np.abs(u_seed)) < 1e-6:
                raise RingModelError(
                    f"branch switch fell back on the trivial state at "
                    f"lambda={lam_k:g} sign={sign:+g}")
            # continue in the gain up to the target at mu = 0
            br = continue_branch(
                lambda u, lam: residual_mu(u, 0.0, lam), u_seed, lam_seed,
                (lambda_min, lambda_target * 1.001), cfg, param_name="lambda",
                direction=+1, detect_folds=False)
            u_at_target = _slice_at(br, "lambda", lambda_target, residual_mu, cfg)
            # (iv) continue in mu from 0 to 1 at fixed gain
            u_final = _continue_in_mu(residual_mu, u_at_target, lambda_target, cfg)
            results.append((f"mode{k}{'+' if sign > 0 else '-'}",
                            unpack(u_final)))
    return results


def _slice_at(branch, pname, target, residual_mu, cfg):
    vals = branch.param(pname)
    i = int(np.argmin(np.abs(vals - target)))
    u = branch.points[i].state
    return newton_solve(lambda v: residual_mu(v, 0.0, target), u, cfg)


def _continue_in_mu(residual_mu, u0, lam, cfg):
    br = continue_branch(
        lambda u, mu: residual_mu(u, mu, lam), u0, 0.0, (-0.01, 1.001), cfg,
        param_name="mu", direction=+1, detect_folds=False)
    mus = br.param("mu")
    if mus[-1] < 1.0 - 1e-9 and np.max(mus) < 1.0 - 1e-9:
        raise RingModelError(f"mu-continuation stalled at mu={mus[-1]:g}")
    i = int(np.argmin(np.abs(mus - 1.0)))
    return newton_solve(lambda v: residual_mu(v, 1.0, lam), br.points[i].state, cfg)
