"""Closed-form and semi-analytic results for the single-mode ring model.

Polar reduction of the N=1 dynamics, the pitchfork existence condition for
tuned states, the boundary in the (threshold, J1) plane below which no tuning
curve exists, the even/odd forced equilibrium families, and the half-width
formula for tuning curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .model import ModelSpec, RingModelError, _kernel, Stimulus
from .continuation import ContinuationConfig, newton_solve


@dataclass
class PolarState:
    """N=1 state in polar coordinates, z1 = rho e^{2 i phi}."""

    v0: float
    rho: float
    phi: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        self.phi = self.phi % math.pi


@dataclass
class ThresholdBoundary:
    """Sampled existence boundary J1_min(theta) for tuned equilibria."""

    eps0: int
    samples: list  # (theta, j1_min) pairs

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("theta,j1_min,eps0\n")
            for theta, j1 in self.samples:
                fh.write(f"{theta:.12g},{j1:.12g},{self.eps0}\n")


def _check_n1(spec):
    if spec.n_modes != 1:
        raise ValueError("N=1 analysis requires n_modes == 1")
    if spec.j_weights[0] <= 0:
        raise ValueError("N=1 analysis requires J1 > 0")


def _b_integrals(spec, v0, rho):
    """(B0, m1) with B0 = (1/pi) int S(lambda(v0 + sqrt(J1) rho cos2y)) dy and
    m1 the matching cos2y projection; signed rho is allowed (m1 is odd)."""
    kern = _kernel(spec)
    z = np.array([rho + 0j])
    m0, mk = kern.projections(v0, z)
    return m0, float(mk[0].real)


def polar_rhs(p, stim, spec):
    """Polar time derivatives (v0', rho', phi') for the canonical stimulus.

    Valid only for the canonical LGN drive at x0 = 0 (forcing eps beta /
    sqrt(J1) along cos 2phi). Raises at rho = 0 where the phase equation is
    undefined; use the Cartesian form there.
    """
    _check_n1(spec)
    if p.rho == 0.0:
        raise RingModelError("phase dynamics undefined at rho = 0; "
                             "use the Cartesian vector field")
    i0, i_k, eps = stim.at(0.0)
    j1 = spec.j_weights[0]
    force = eps * i_k[0].real  # = eps*beta/sqrt(J1) for the canonical drive
    b0, m1 = _b_integrals(spec, p.v0, p.rho)
    kern = _kernel(spec)
    tau = spec.time_constant
    dv0 = (-p.v0 + spec.j0_sign * b0 - kern.theta_term + eps * i0) / tau
    drho = (-p.rho + math.sqrt(j1) * m1 + force * math.cos(2 * p.phi)) / tau
    dphi = -force * math.sin(2 * p.phi) / (2 * p.rho * tau)
    return dv0, drho, dphi


def polar_equilibrium_residual(spec, stim, branch_parity="even"):
    """Residual G(v0, rho) = 0 for the phase-locked equilibrium families.

    The even family fixes phi = 0 (forcing +eps beta / sqrt(J1)), the odd one
    phi = pi/2 (forcing with the opposite sign). rho is treated as a signed
    quantity so a single smooth system covers the branch through zero.
    """
    _check_n1(spec)
    if branch_parity not in ("even", "odd"):
        raise ValueError("branch_parity must be 'even' or 'odd'")
    sign = 1.0 if branch_parity == "even" else -1.0
    i0, i_k, eps = stim.at(0.0)
    j1 = spec.j_weights[0]
    force = sign * eps * i_k[0].real
    kern = _kernel(spec)

    def residual(u):
        v0, rho = u
        b0, m1 = _b_integrals(spec, v0, rho)
        return np.array([
            -v0 + spec.j0_sign * b0 - kern.theta_term + eps * i0,
            -rho + math.sqrt(j1) * m1 + force,
        ])

    return residual


def forced_residual_lambda(spec, stim, branch_parity="even"):
    """residual(u, lam) closure for continuation of the forced N=1 system."""
    def residual(u, lam):
        return polar_equilibrium_residual(spec.with_gain(lam), stim,
                                          branch_parity)(u)
    return residual


def forced_residual_eps_lambda(spec, beta, branch_parity="even"):
    """residual(u, eps, lam) closure for two-parameter fold tracking."""
    from .model import make_lgn_stimulus

    def residual(u, eps, lam):
        sp = spec.with_gain(lam)
        stim = make_lgn_stimulus(beta, 0.0, eps, sp)
        return polar_equilibrium_residual(sp, stim, branch_parity)(u)
    return residual


# ---------------------------------------------------------------------------
# pitchfork condition and existence boundary


def pitchfork_condition(j1, theta, eps0, u_grid=2000):
    """Smallest gain at which tuned states branch off the flat state, if any.

    The two conditions

        v0 = eps0 S(lambda v0) - theta,   1 = lambda S'(lambda v0) J1 / 2

    are solved by the substitution U = S(lambda v0) in (0, 1): the second gives
    lambda(U) = 2 / (J1 U (1 - U)) and the first becomes a scalar root problem

        h(U) = lambda(U) (eps0 U - theta) - logit(U) = 0.

    Returns (lambda*, v0*) for the root with the smallest gain, or None. Any
    returned gain satisfies lambda* J1 >= 8 automatically since U(1-U) <= 1/4.
    """
    if j1 <= 0:
        raise ValueError("J1 must be > 0")

    def h(u):
        lam = 2.0 / (j1 * u * (1.0 - u))
        return lam * (eps0 * u - theta) - math.log(u / (1.0 - u))

    us = np.linspace(1e-9, 1.0 - 1e-9, u_grid)
    hv = np.array([h(u) for u in us])
    roots = []
    for i in range(len(us) - 1):
        if np.isfinite(hv[i]) and np.isfinite(hv[i + 1]) and hv[i] * hv[i + 1] < 0:
            u_root = brentq(h, us[i], us[i + 1], xtol=1e-14)
            lam = 2.0 / (j1 * u_root * (1.0 - u_root))
            roots.append((lam, eps0 * u_root - theta))
    if not roots:
        return None
    return min(roots, key=lambda r: r[0])


def _tuned_state_exists(j1, theta, eps0, lambdas):
    """Existence test via the quadratic route of the gain-scan formulation.

    For each gain, U(1-U) = 2/(lambda J1) has the real solutions
    U+- = (1 +- sqrt(1 - 8/(lambda J1))) / 2 whenever lambda J1 >= 8; a tuned
    state exists iff the remaining condition U = S(lambda (eps0 U - theta))
    has a root in the gain, detected by sign change along the scan.
    """
    lam = np.asarray(lambdas, dtype=float)
    lam_max = float(np.max(lam))
    lam = lam[lam * j1 >= 8.0]
    corner = 8.0 / j1
    if corner <= lam_max:
        # refine near the branch point U+ = U- = 1/2 where roots can hide
        # between the corner and the first regular grid node
        local = corner * (1.0 + np.logspace(-9, -1, 17))
        lam = np.unique(np.concatenate([[corner], local[local <= lam_max], lam]))
    if lam.size == 0:
        return False
    disc = np.sqrt(np.maximum(1.0 - 8.0 / (lam * j1), 0.0))
    for u in ((1.0 + disc) / 2.0, (1.0 - disc) / 2.0):
        g = u - expit(lam * (eps0 * u - theta))
        if np.any(np.abs(g) < 1e-12):
            return True
        if np.any(g[:-1] * g[1:] < 0):
            return True
    return False


def threshold_boundary(eps0, theta_grid=None, j1_range=(0.01, 10.0),
                       lambda_grid=None, j1_tol=1e-3):
    """Existence boundary J1_min(theta) for tuned stationary states.

    Scans the gain over ``lambda_grid`` (default [0, 30] with a fine step) for
    each candidate (theta, J1) using the quadratic-in-U criterion, then bisects
    J1 down to ``j1_tol``. Returns a ThresholdBoundary; entries where no J1 in
    range admits tuned states get j1_min = nan.
    """
    if theta_grid is None:
        theta_grid = np.linspace(0.0, 1.0, 21)
    theta_grid = np.asarray(theta_grid, dtype=float)
    if theta_grid.size == 0:
        raise ValueError("empty theta grid")
    if lambda_grid is None:
        lambda_grid = np.linspace(0.05, 30.0, 1200)
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if lambda_grid.size == 0:
        raise ValueError("empty lambda grid")
    j_lo0, j_hi0 = j1_range

    samples = []
    for theta in theta_grid:
        if not _tuned_state_exists(j_hi0, theta, eps0, lambda_grid):
            samples.append((float(theta), float("nan")))
            continue
        lo, hi = j_lo0, j_hi0
        if _tuned_state_exists(lo, theta, eps0, lambda_grid):
            samples.append((float(theta), float(lo)))
            continue
        while hi - lo > j1_tol:
            mid = 0.5 * (lo + hi)
            if _tuned_state_exists(mid, theta, eps0, lambda_grid):
                hi = mid
            else:
                lo = mid
        samples.append((float(theta), float(hi)))
    return ThresholdBoundary(int(eps0), samples)


# ---------------------------------------------------------------------------
# tuning-curve half-width


def tuning_halfwidth(v0f, pi1f, lam, theta, j1):
    """Half-width at half height of a tuned activity profile, in radians.

    With a = lambda (v0 - theta) and b = lambda sqrt(pi1 J1) the half-height
    crossing satisfies cos(2 phi) = f(a, b) where
    f(a, b) = -(a + ln(1 + 2 e^{-a-b})) / b; the half-width is
    phi = arccos(f)/2. Returns None when the profile never drops to half of
    its peak (f outside [-1, 1]).
    """
    b = lam * math.sqrt(pi1f * j1)
    if b <= 0:
        raise ValueError("need lambda * sqrt(pi1 * J1) > 0")
    a = lam * (v0f - theta)
    f = -(a + math.log1p(2.0 * math.exp(-a - b))) / b
    if not -1.0 <= f <= 1.0:
        return None
    return 0.5 * math.acos(f)


def halfwidth_by_rootfind(v0f, pi1f, lam, theta, j1):
    """Independent half-width: root-find the half-height crossing of
    S(a + b cos 2x) on x in (0, pi/2)."""
    b = lam * math.sqrt(pi1f * j1)
    a = lam * (v0f - theta)
    peak = expit(a + b)

    def g(x):
        return expit(a + b * math.cos(2 * x)) - 0.5 * peak

    if g(math.pi / 2 - 1e-12) > 0:
        return None
    return brentq(g, 1e-12, math.pi / 2 - 1e-12, xtol=1e-14)


# ---------------------------------------------------------------------------
# equilibrium census


def find_equilibria_grid(spec, stim, v0_range=(-1.5, 0.5), rho_range=(-1.5, 1.5),
                         n_grid=50, cfg=None, dedup_tol=1e-6):
    """Newton from an n_grid x n_grid lattice of (v0, rho) starts; returns the
    distinct equilibria of the signed even-parity system."""
    cfg = cfg or ContinuationConfig(newton_tol=1e-11, newton_max_iters=40)
    residual = polar_equilibrium_residual(spec, stim, "even")
    found = []
    for v0 in np.linspace(*v0_range, n_grid):
        for rho in np.linspace(*rho_range, n_grid):
            try:
                u = newton_solve(residual, np.array([v0, rho]), cfg)
            except RingModelError:
                continue
            if not any(np.linalg.norm(u - v) < dedup_tol for v in found):
                found.append(u)
    return sorted(found, key=lambda u: u[1])
