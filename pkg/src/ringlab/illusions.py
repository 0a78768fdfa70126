"""Dynamic-stimulus protocols and the 90-degree tuning illusion.

Two time courses exploit the bistability of the tuned states. In the rotate
protocol the drive is dragged slowly from orientation 0 to pi/2 and then
snapped back to 0; the network, parked on the pi/2 attractor, stays there, so
a 0-oriented stimulus is answered by a 90-degree cortical state. In the
mixture protocol the drive cross-fades from the 0-peaked stimulus to the
pi/2-peaked one without ever rotating; the tuned mode coefficient passes
through zero and the network never leaves the basin of the 0 state, so a
90-degree stimulus is answered by a 0-degree response. Either way the
read-out depends on the path of the stimulus, not on its endpoint.

The rotated-back state is a genuine saddle: under the 0-oriented drive the
pi/2-peaked state is unstable against phase perturbations at the slow rate
eps beta / (sqrt(J1) rho), so the illusory read-out persists only for times
short compared to the inverse of that rate times the log of the perturbation
floor (tens of thousands of time constants at the default contrast). The
default t_end stays inside that window, matching the published horizon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .model import (CortexState, ModelSpec, Stimulus, galerkin_rhs,
                    integrate, make_lgn_stimulus)

PROTOCOLS = ("rotate", "mixture")

TC0 = "TC0"
TC90 = "TC90"
UNTUNED = "untuned"
UNDECIDED = "undecided"


@dataclass
class Scenario:
    """Protocol parameters; defaults reproduce the reference illusion runs."""

    protocol: str = "rotate"
    gain: float = 15.0
    epsilon: float = 0.01
    beta: float = 0.1
    theta: float = 0.0
    j0_sign: int = -1
    j_weights: tuple = (1.5,)
    sigmoid_kind: str = "standard"
    ramp_start: float = 0.0
    ramp_end: float = 1000.0
    switch_time: float = 20000.0
    t_end: float = 25000.0
    dt: float = 0.25
    settle_time: float = 300.0
    sample_every: int = 20

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not self.ramp_start < self.ramp_end <= self.switch_time <= self.t_end:
            raise ValueError("need ramp_start < ramp_end <= switch_time <= t_end")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        self.j_weights = tuple(float(j) for j in self.j_weights)

    @classmethod
    def from_dict(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown scenario keys: {sorted(extra)}")
        return cls(**doc)

    def spec(self):
        return ModelSpec(n_modes=len(self.j_weights), j0_sign=self.j0_sign,
                         j_weights=self.j_weights, gain=self.gain,
                         threshold=self.theta,
                         sigmoid_kind=self.sigmoid_kind)

    # mixture protocol: the cross-fade runs over a much longer window than
    # the rotation ramp
    @property
    def mix_start(self):
        return self.ramp_end

    @property
    def mix_end(self):
        return self.switch_time / 2.0

    @property
    def endpoint_angle(self):
        """Orientation of the stimulus at t_end (rotate snaps back to 0,
        mixture finishes as the pure pi/2 stimulus)."""
        return 0.0 if self.protocol == "rotate" else math.pi / 2.0


def _ramp(t, t0, t1):
    if t <= t0:
        return 0.0
    if t >= t1:
        return 1.0
    return (t - t0) / (t1 - t0)


def rotate_protocol(scn, spec=None):
    """Stimulus whose orientation rotates rigidly from 0 to pi/2.

    x0(t) ramps linearly over [ramp_start, ramp_end], holds at pi/2 until
    switch_time, then snaps back to 0; the contrast never changes.
    """
    spec = spec or scn.spec()
    base = make_lgn_stimulus(scn.beta, 0.0, scn.epsilon, spec)

    def schedule(t):
        if t > scn.switch_time:
            return base.i0, base.i_k, scn.epsilon
        x0 = (math.pi / 2.0) * _ramp(t, scn.ramp_start, scn.ramp_end)
        i_k = base.i_k * np.exp(2j * np.arange(1, spec.n_modes + 1) * x0)
        return base.i0, i_k, scn.epsilon

    return Stimulus(base.i0, base.i_k, scn.epsilon, schedule=schedule)


def mixture_protocol(scn, spec=None):
    """Cross-fade I(t) = (1 - psi) I_0 + psi I_{pi/2}.

    psi ramps linearly over [mix_start, mix_end] and stays at 1, so the drive
    finishes as the pure pi/2-peaked stimulus. The endpoint stimuli share the
    mean component, so only the tuned coefficient fades: it passes through
    zero at psi = 1/2 instead of rotating.
    """
    spec = spec or scn.spec()
    base = make_lgn_stimulus(scn.beta, 0.0, scn.epsilon, spec)
    target = make_lgn_stimulus(scn.beta, math.pi / 2.0, scn.epsilon, spec)

    def schedule(t):
        psi = _ramp(t, scn.mix_start, scn.mix_end)
        i_k = (1.0 - psi) * base.i_k + psi * target.i_k
        return base.i0, i_k, scn.epsilon

    return Stimulus(base.i0, base.i_k, scn.epsilon, schedule=schedule)


def settle_initial_state(scn, spec=None):
    """Deterministic initial condition: relax a weakly tuned seed under the
    static stimulus at orientation 0 until it sits on the driven attractor."""
    spec = spec or scn.spec()
    stim = make_lgn_stimulus(scn.beta, 0.0, scn.epsilon, spec)
    seed = CortexState(0.0, np.zeros(spec.n_modes, dtype=complex))
    seed.z[0] = 0.1
    traj = integrate(seed, stim, spec, scn.settle_time, dt=scn.dt,
                     sample_every=10 ** 9)
    return traj.final()


def classify_basin(state, spec, t_max=5000.0, dt=0.25, rhs_tol=1e-9,
                   rho_tol=0.05, angle_tol=math.pi / 8):
    """Label of the unforced attractor reached from ``state``.

    Integrates the stimulus-free dynamics until the vector field norm falls
    below ``rhs_tol`` (checked in chunks) or ``t_max`` elapses; then
    ``untuned`` when |z1| < rho_tol, ``TC90``/``TC0`` when the peak angle is
    within ``angle_tol`` of pi/2 / 0 modulo pi, ``undecided`` otherwise.
    """
    stim = Stimulus.off(spec)
    current = state.copy()
    t_done = 0.0
    chunk = 200.0
    converged = False
    while t_done < t_max:
        t_step = min(chunk, t_max - t_done)
        traj = integrate(current, stim, spec, t_step, dt=dt,
                         sample_every=10 ** 9)
        current = traj.final()
        t_done += t_step
        d = galerkin_rhs(current, stim, spec)
        norm = math.hypot(d.v0, float(np.linalg.norm(d.z)))
        if norm < rhs_tol:
            converged = True
            break
    if not converged:
        return UNDECIDED, current
    if abs(current.z[0]) < rho_tol:
        return UNTUNED, current
    angle = current.peak_angle()
    dist90 = min(abs(angle - math.pi / 2), math.pi - abs(angle - math.pi / 2))
    dist0 = min(angle, math.pi - angle)
    if dist90 <= angle_tol:
        return TC90, current
    if dist0 <= angle_tol:
        return TC0, current
    return UNDECIDED, current


@dataclass
class OutcomeReport:
    """Classification result of one protocol run."""

    scenario: dict
    basin: str
    final_peak_angle: float
    final_rho: float
    final_v0: float
    stimulus_endpoint_angle: float = 0.0

    def illusion(self):
        """True when the read-out disagrees with the final stimulus
        orientation (TC90 under a 0 stimulus or TC0 under a pi/2 one)."""
        near_zero = self.stimulus_endpoint_angle < math.pi / 4
        return self.basin == (TC90 if near_zero else TC0)

    def to_json(self, path):
        doc = asdict(self)
        doc["illusion"] = self.illusion()
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)


def run_scenario(scn, trajectory_csv=None, report_json=None):
    """Execute one protocol end to end.

    Settles onto the driven attractor at orientation 0, runs the scheduled
    stimulus to t_end, classifies the basin of the final state, and
    optionally writes the sampled trajectory and the report. Returns
    (Trajectory, OutcomeReport).
    """
    spec = scn.spec()
    builder = rotate_protocol if scn.protocol == "rotate" else mixture_protocol
    stim = builder(scn, spec)
    state0 = settle_initial_state(scn, spec)
    traj = integrate(state0, stim, spec, scn.t_end, dt=scn.dt,
                     sample_every=scn.sample_every)
    basin, final = classify_basin(traj.final(), spec, dt=scn.dt)
    report = OutcomeReport(
        scenario=asdict(scn),
        basin=basin,
        final_peak_angle=final.peak_angle(),
        final_rho=float(abs(final.z[0])),
        final_v0=final.v0,
        stimulus_endpoint_angle=scn.endpoint_angle,
    )
    if trajectory_csv is not None:
        traj.to_csv(trajectory_csv)
    if report_json is not None:
        report.to_json(report_json)
    return traj, report
