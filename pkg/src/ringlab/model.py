"""Ring model of a V1 hypercolumn and its Fourier-mode reduction.

The network state is a voltage profile V(x) on the half-circle of preferred
orientations, x in [-pi/2, pi/2). Because the connectivity kernel

    J(x) = eps0 + sum_p J_p cos(2 p x)

has finitely many Fourier modes, the dynamics contract onto the span of
{1, cos(2px), sin(2px), p <= N} and the state reduces to one real number v0
plus N complex amplitudes z_1..z_N with

    V(x) = v0 + sum_p sqrt(|J_p|) Re(z_p exp(-2 i p x)),

so a tuned state z_1 = rho exp(2 i phi) peaks at x = phi.

This module holds the model definition, the canonical LGN drive, the reduced
vector field (mode projections by Gauss-Legendre quadrature), the O(2) group
action, a fixed-step RK4 integrator, and a direct grid simulation of the
untruncated ring used as an independent cross-check of the reduction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import expit

MIN_QUAD_ORDER = 16
DEFAULT_QUAD_ORDER = 40

SIGMOID_KINDS = ("standard", "centered", "homotopy")


class RingModelError(Exception):
    """Base class for errors raised by ringlab."""


class BlowUpError(RingModelError):
    """Non-finite state encountered during time integration."""

    def __init__(self, t):
        super().__init__(f"non-finite state at t={t:g}")
        self.t = t


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of the ring model.

    ``j_weights`` holds the signed Fourier weights J_1..J_N; ``j0_sign`` is the
    normalized mean weight eps0 = +-1. ``sigmoid_kind`` selects the
    nonlinearity: the standard logistic S, the centered S0 = S - 1/2, or the
    homotopy deformation that interpolates from S0 (mu=0) to the thresholded
    standard model (mu=1).
    """

    n_modes: int = 1
    j0_sign: int = -1
    j_weights: tuple = (1.5,)
    gain: float = 1.0
    threshold: float = 0.0
    time_constant: float = 1.0
    homotopy_mu: float = 0.0
    sigmoid_kind: str = "standard"
    quad_order: int = DEFAULT_QUAD_ORDER

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.j0_sign not in (-1, 1):
            raise ValueError("j0_sign must be -1 or +1")
        if len(self.j_weights) != self.n_modes:
            raise ValueError("j_weights must have n_modes entries")
        if self.gain < 0:
            raise ValueError("gain must be >= 0")
        if self.time_constant <= 0:
            raise ValueError("time_constant must be > 0")
        if self.sigmoid_kind not in SIGMOID_KINDS:
            raise ValueError(f"unknown sigmoid_kind {self.sigmoid_kind!r}")
        if not 0.0 <= self.homotopy_mu <= 1.0:
            raise ValueError("homotopy_mu must lie in [0, 1]")
        if self.quad_order < MIN_QUAD_ORDER:
            raise ValueError(f"quad_order must be >= {MIN_QUAD_ORDER}")
        object.__setattr__(self, "j_weights", tuple(float(j) for j in self.j_weights))

    def j_abs(self, k):
        """|J_k| for k = 1..N."""
        return abs(self.j_weights[k - 1])

    def j_sign(self, k):
        """eps_k for k = 1..N (sign of J_k; +1 for a zero weight)."""
        return -1 if self.j_weights[k - 1] < 0 else 1

    def with_gain(self, gain):
        return replace(self, gain=float(gain))


@dataclass
class CortexState:
    """Reduced cortical state (v0, z_1..z_N)."""

    v0: float
    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)

    @classmethod
    def zero(cls, spec):
        return cls(0.0, np.zeros(spec.n_modes, dtype=complex))

    def copy(self):
        return CortexState(self.v0, self.z.copy())

    def peak_angle(self):
        """Orientation of the dominant-mode peak, 0.5 * arg(z1), in [0, pi)."""
        return 0.5 * cmath.phase(self.z[0]) % math.pi

    def to_vector(self):
        """Real coordinates (v0, Re z_1, Im z_1, ..., Re z_N, Im z_N)."""
        out = np.empty(1 + 2 * len(self.z))
        out[0] = self.v0
        out[1::2] = self.z.real
        out[2::2] = self.z.imag
        return out

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=float)
        return cls(vec[0], vec[1::2] + 1j * vec[2::2])


@dataclass
class Stimulus:
    """LGN drive in mode coordinates.

    The reconstructed drive is eps * (I0 + sum_k Re(I_k sqrt(|J_k|) e^{-2ikx})),
    the same phase convention as the voltage modes, so I_k adds directly to
    the z_k equation. ``schedule``, if set, maps a time t to a
    (i0, i_k, contrast) triple and overrides the static coefficients during
    integration.
    """

    i0: float = 0.0
    i_k: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))
    contrast: float = 0.0
    schedule: object = None

    def __post_init__(self):
        self.i_k = np.asarray(self.i_k, dtype=complex)

    @classmethod
    def off(cls, spec):
        return cls(0.0, np.zeros(spec.n_modes, dtype=complex), 0.0)

    def at(self, t):
        """Effective (i0, i_k, contrast) at time t."""
        if self.schedule is None:
            return self.i0, self.i_k, self.contrast
        return self.schedule(t)

    def __repr__(self):
        return f"Stimulus(i0={self.i0}, i_k={self.i_k}, contrast={self.contrast})"


def stimulus_drive(stim, spec, x, t=0.0):
    """Reconstructed drive eps * I(x) with the model's sqrt(|J_k|) weights."""
    i0, i_k, eps = stim.at(t)
    x = np.asarray(x, dtype=float)
    total = np.full(x.shape, float(i0))
    for k in range(1, spec.n_modes + 1):
        total += (i_k[k - 1] * math.sqrt(spec.j_abs(k)) * np.exp(-2j * k * x)).real
    return eps * total


def make_lgn_stimulus(beta, x0, epsilon, spec, mode2_scale=0.0):
    """Canonical LGN stimulus eps * (1 - beta + beta cos(2(x - x0))).

    The tuned coefficient carries e^{+2 i x0} so that, in the shared mode
    basis, the drive peaks at x0 and pulls z_1 toward rho e^{2 i x0}. With
    ``mode2_scale`` nonzero (N >= 2) an extra second-harmonic component is
    added such that sqrt(|J_2|) I_2 = mode2_scale * beta * e^{4 i x0}.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if spec.j_abs(1) == 0.0:
        raise ValueError("cannot normalize I_1 with |J_1| = 0")
    i_k = np.zeros(spec.n_modes, dtype=complex)
    i_k[0] = beta / math.sqrt(spec.j_abs(1)) * cmath.exp(2j * x0)
    if mode2_scale:
        if spec.n_modes < 2:
            raise ValueError("mode2_scale requires n_modes >= 2")
        if spec.j_abs(2) == 0.0:
            raise ValueError("cannot normalize I_2 with |J_2| = 0")
        i_k[1] = mode2_scale * beta / math.sqrt(spec.j_abs(2)) * cmath.exp(4j * x0)
    return Stimulus(1.0 - beta, i_k, float(epsilon))


def sigmoid_eval(x, spec):
    """Scalar nonlinearity selected by spec.sigmoid_kind."""
    s = expit(x)
    if spec.sigmoid_kind == "standard":
        return s
    if spec.sigmoid_kind == "centered":
        return s - 0.5
    return s - 0.5 + spec.homotopy_mu * (0.5 - spec.threshold)


def _quad_nodes(order):
    nodes, weights = leggauss(order)
    return nodes * (math.pi / 2.0), weights * (math.pi / 2.0)


class _RhsKernel:
    """Precomputed quadrature tables for the reduced vector field.

    Mode projections:

        M_k = (1/pi) int_{-pi/2}^{pi/2} f(lambda V(y)) e^{2kiy} dy

    where f is the active nonlinearity (standard or centered logistic, or a
    caller-supplied polynomial surrogate). The equations are

        tau v0' = -v0 + eps0 M_0 - theta_term + eps I_0
        tau z_k' = -z_k + eps_k sqrt(|J_k|) M_k + eps I_k

    theta_term is theta for the standard sigmoid, 0 for the centered one, and
    mu (theta - eps0/2) for the homotopy model, whose nonlinearity in the
    quadrature stays S0. The eps0 on the 1/2 makes the deformation endpoint
    exact: eps0 (M0 of S) = eps0 (M0 of S0) + eps0/2, so mu = 1 recovers the
    thresholded standard model for either sign of eps0.
    """

    def __init__(self, spec, nonlinearity=None):
        self.spec = spec
        n = spec.n_modes
        y, w = _quad_nodes(spec.quad_order)
        self.w = w / math.pi
        ky = np.outer(np.arange(1, n + 1), y)  # shape (N, order)
        self.cos_t = np.cos(2.0 * ky)
        self.sin_t = np.sin(2.0 * ky)
        self.jroot = np.array([math.sqrt(spec.j_abs(k)) for k in range(1, n + 1)])
        self.jsign = np.array([spec.j_sign(k) for k in range(1, n + 1)], dtype=float)
        if nonlinearity is not None:
            self.f = nonlinearity
            self.theta_term = 0.0
        elif spec.sigmoid_kind == "standard":
            self.f = expit
            self.theta_term = spec.threshold
        elif spec.sigmoid_kind == "centered":
            self.f = lambda u: expit(u) - 0.5
            self.theta_term = 0.0
        else:  # homotopy
            self.f = lambda u: expit(u) - 0.5
            self.theta_term = spec.homotopy_mu * (spec.threshold - 0.5 * spec.j0_sign)

    def field_samples(self, v0, z):
        """V at the quadrature nodes, using Re(z_p e^{-2ipy})."""
        zr = (z.real * self.jroot)[:, None]
        zi = (z.imag * self.jroot)[:, None]
        return v0 + np.sum(zr * self.cos_t + zi * self.sin_t, axis=0)

    def projections(self, v0, z):
        """(M_0, M_1..M_N) of f(lambda V)."""
        s = self.f(self.spec.gain * self.field_samples(v0, z))
        sw = s * self.w
        m0 = float(np.sum(sw))
        mk = self.cos_t @ sw + 1j * (self.sin_t @ sw)
        return m0, mk

    def rhs(self, v0, z, i0, i_k, eps):
        spec = self.spec
        m0, mk = self.projections(v0, z)
        dv0 = -v0 + spec.j0_sign * m0 - self.theta_term + eps * i0
        dz = -z + self.jsign * self.jroot * mk + eps * i_k
        return dv0 / spec.time_constant, dz / spec.time_constant


_KERNEL_CACHE = {}


def _kernel(spec, nonlinearity=None):
    if nonlinearity is not None:
        return _RhsKernel(spec, nonlinearity)
    key = spec
    kern = _KERNEL_CACHE.get(key)
    if kern is None:
        kern = _RhsKernel(spec)
        if len(_KERNEL_CACHE) > 256:
            _KERNEL_CACHE.clear()
        _KERNEL_CACHE[key] = kern
    return kern


def galerkin_rhs(state, stim, spec, t=0.0, nonlinearity=None):
    """Time derivative of the reduced state.

    ``nonlinearity`` optionally replaces the sigmoid in the quadrature (used
    when cross-checking against the polynomial orbit-space engine).
    """
    kern = _kernel(spec, nonlinearity)
    i0, i_k, eps = stim.at(t)
    dv0, dz = kern.rhs(state.v0, state.z, i0, np.asarray(i_k, dtype=complex), eps)
    return CortexState(dv0, dz)


def rhs_vector(vec, stim, spec, t=0.0, nonlinearity=None):
    """galerkin_rhs in packed real coordinates (for solvers and Jacobians)."""
    kern = _kernel(spec, nonlinearity)
    i0, i_k, eps = stim.at(t)
    z = vec[1::2] + 1j * vec[2::2]
    dv0, dz = kern.rhs(vec[0], z, i0, np.asarray(i_k, dtype=complex), eps)
    out = np.empty_like(vec)
    out[0] = dv0
    out[1::2] = dz.real
    out[2::2] = dz.imag
    return out


def reconstruct_voltage(state, spec, x):
    """V(x) = v0 + sum_p sqrt(|J_p|) Re(z_p e^{-2ipx})."""
    x = np.asarray(x, dtype=float)
    total = np.full(x.shape, float(state.v0))
    for p in range(1, spec.n_modes + 1):
        total += (state.z[p - 1] * math.sqrt(spec.j_abs(p)) * np.exp(-2j * p * x)).real
    return total


def reconstruct_activity(state, spec, stim, x):
    """Firing-rate profile f(lambda V(x)).

    V already carries the threshold and input through the fixed-point relation
    V = J.A + eps I - theta, so no extra -theta appears here.
    """
    del stim  # the drive is already folded into an equilibrium state
    return sigmoid_eval(spec.gain * reconstruct_voltage(state, spec, x), spec)


def group_act(state, gamma, reflect=False):
    """Apply the rotation T_gamma (z_k -> e^{2ik gamma} z_k), then optionally
    the reflection R (conjugation of every z_k)."""
    k = np.arange(1, len(state.z) + 1)
    z = state.z * np.exp(2j * k * gamma)
    if reflect:
        z = np.conj(z)
    return CortexState(state.v0, z)


@dataclass
class Trajectory:
    """Sampled solution of the reduced dynamics."""

    times: np.ndarray
    states: list
    stimulus_log: list

    def final(self):
        return self.states[-1]

    def peak_angles(self):
        return np.array([s.peak_angle() for s in self.states])

    def to_csv(self, path):
        """CSV export: t,v0,re_z1,im_z1,...,peak_angle (angles in radians)."""
        n = len(self.states[0].z)
        cols = ["t", "v0"]
        for k in range(1, n + 1):
            cols += [f"re_z{k}", f"im_z{k}"]
        cols.append("peak_angle")
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for t, s in zip(self.times, self.states):
                row = [t, s.v0]
                for zk in s.z:
                    row += [zk.real, zk.imag]
                row.append(s.peak_angle())
                fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def integrate(state0, stim, spec, t_end, dt=None, sample_every=1, nonlinearity=None):
    """Fixed-step RK4 integration of the reduced dynamics.

    The stimulus schedule is evaluated at every stage time. Raises
    BlowUpError on a non-finite state (bounded solutions make this a bug
    indicator rather than an expected failure).
    """
    if dt is None:
        dt = spec.time_constant / 20.0
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    kern = _kernel(spec, nonlinearity)

    def f(t, y):
        i0, i_k, eps = stim.at(t)
        z = y[1::2] + 1j * y[2::2]
        dv0, dz = kern.rhs(y[0], z, i0, np.asarray(i_k, dtype=complex), eps)
        out = np.empty_like(y)
        out[0] = dv0
        out[1::2] = dz.real
        out[2::2] = dz.imag
        return out

    n_steps = int(round(t_end / dt))
    y = state0.to_vector()
    times = [0.0]
    states = [state0.copy()]
    stim_log = [stim.at(0.0)]
    t = 0.0
    for i in range(n_steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (i + 1) * dt
        if not np.all(np.isfinite(y)):
            raise BlowUpError(t)
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            times.append(t)
            states.append(CortexState.from_vector(y))
            stim_log.append(stim.at(t))
    return Trajectory(np.array(times), states, stim_log)


# ---------------------------------------------------------------------------
# direct simulation of the untruncated ring (oracle for the reduction)


def connectivity_kernel(spec, x):
    """J(x) = eps0 + sum_p J_p cos(2 p x)."""
    x = np.asarray(x, dtype=float)
    total = np.full(x.shape, float(spec.j0_sign))
    for p in range(1, spec.n_modes + 1):
        total += spec.j_weights[p - 1] * np.cos(2 * p * x)
    return total


def ring_grid(m):
    """Uniform grid of m points on [-pi/2, pi/2)."""
    return -math.pi / 2.0 + math.pi * np.arange(m) / m


def full_ring_simulate(v_init, stim, spec, t_end, dt=None, sample_every=1):
    """Method-of-lines simulation of tau V' = -V + J.S(lambda V) + eps I - theta.

    ``v_init`` is V sampled on ring_grid(M); the periodic convolution uses the
    trapezoidal rule (exact for trigonometric polynomials below the grid
    Nyquist limit). Returns (times, V_samples) arrays.
    """
    v = np.asarray(v_init, dtype=float).copy()
    m = v.size
    if m < 4 * spec.n_modes + 2:
        raise ValueError("need at least 4N + 2 grid points")
    if dt is None:
        dt = spec.time_constant / 20.0
    x = ring_grid(m)
    kmat = connectivity_kernel(spec, x[:, None] - x[None, :]) / m
    kern = _kernel(spec)
    f = kern.f
    theta_term = kern.theta_term
    tau = spec.time_constant
    lam = spec.gain

    def deriv(t, v):
        i0, i_k, eps = stim.at(t)
        drive = stimulus_drive(Stimulus(i0, i_k, eps), spec, x)
        return (-v + kmat @ f(lam * v) - theta_term + drive) / tau

    n_steps = int(round(t_end / dt))
    times = [0.0]
    samples = [v.copy()]
    t = 0.0
    for i in range(n_steps):
        k1 = deriv(t, v)
        k2 = deriv(t + 0.5 * dt, v + 0.5 * dt * k1)
        k3 = deriv(t + 0.5 * dt, v + 0.5 * dt * k2)
        k4 = deriv(t + dt, v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (i + 1) * dt
        if not np.all(np.isfinite(v)):
            raise BlowUpError(t)
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            times.append(t)
            samples.append(v.copy())
    return np.array(times), np.array(samples)


def project_ring_state(v_samples, spec):
    """Galerkin coordinates of a grid-sampled voltage profile."""
    v = np.asarray(v_samples, dtype=float)
    m = v.size
    x = ring_grid(m)
    v0 = float(np.mean(v))
    z = np.empty(spec.n_modes, dtype=complex)
    for p in range(1, spec.n_modes + 1):
        z[p - 1] = (2.0 / m) * np.sum(v * np.exp(2j * p * x)) / math.sqrt(spec.j_abs(p))
    return CortexState(v0, z)


def mode_coefficient(v_samples, k):
    """Complex Fourier coefficient of cos/sin(2kx) content on the grid."""
    v = np.asarray(v_samples, dtype=float)
    m = v.shape[-1]
    x = ring_grid(m)
    return (2.0 / m) * np.sum(v * np.exp(2j * k * x), axis=-1)
