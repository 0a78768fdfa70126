"""O(2) orbit-space reduction of the two-mode ring model.

The quotient of the (z1, z2) mode space by rotations and reflection is
coordinatized by the invariant polynomials

    pi1 = |z1|^2,  pi2 = |z2|^2,  pi3 = Re(z1^2 conj(z2)),

subject to pi1 >= 0, pi2 >= 0, pi3^2 <= pi1^2 pi2. After replacing the sigmoid
by a certified Chebyshev polynomial surrogate, the mode projections become
polynomials in (v0, z1, z2) whose equivariant structure

    -z1 + B1 = a z1 + b conj(z1) z2,    -z2 + B2 = c z2 + d z1^2

is extracted exactly by bookkeeping the net rotation frequency of every
monomial and rewriting invariant cofactors in the (pi1, pi2, pi3) basis. The
reduction is exact in the coefficient field for the given surrogate; a
quadrature-plus-gauge oracle provides the independent cross-check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from scipy.optimize import brentq
from scipy.special import expit

from .model import RingModelError, _kernel
from .continuation import ContinuationConfig, continue_branch

ORBIT_TOL = 1e-9


class OrbitSpaceError(RingModelError):
    pass


@dataclass
class OrbitPoint:
    """A point (v0, pi1, pi2, pi3) of the reduced N=2 state space."""

    v0: float
    pi1: float
    pi2: float
    pi3: float

    def __post_init__(self):
        if not self.on_orbit_space():
            raise OrbitSpaceError(
                f"({self.pi1:g}, {self.pi2:g}, {self.pi3:g}) violates the "
                "orbit-space inequalities")

    def on_orbit_space(self, tol=ORBIT_TOL):
        return (self.pi1 >= -tol and self.pi2 >= -tol
                and self.pi3 ** 2 <= self.pi1 ** 2 * self.pi2 + tol)

    def as_array(self):
        return np.array([self.v0, self.pi1, self.pi2, self.pi3])


def hilbert_pi(z1, z2):
    """The Hilbert-basis invariants (pi1, pi2, pi3) of a mode pair."""
    return (abs(z1) ** 2, abs(z2) ** 2, (z1 * z1 * np.conj(z2)).real)


def orbit_membership(pi1, pi2, pi3, tol=ORBIT_TOL):
    return pi1 >= -tol and pi2 >= -tol and pi3 ** 2 <= pi1 ** 2 * pi2 + tol


def gauge_representative(pi1, pi2, pi3):
    """A (z1, z2) pair mapping to the given invariants; needs a strictly
    interior orbit (pi1 > 0 and pi3^2 < pi1^2 pi2)."""
    if pi1 <= 0:
        raise OrbitSpaceError("gauge reconstruction needs pi1 > 0")
    imag_sq = pi1 ** 2 * pi2 - pi3 ** 2
    if imag_sq <= 0:
        raise OrbitSpaceError("boundary orbit: gauge reconstruction ill-posed")
    z1 = math.sqrt(pi1)
    z2 = (pi3 + 1j * math.sqrt(imag_sq)) / pi1
    return z1 + 0j, z2


# ---------------------------------------------------------------------------
# certified polynomial surrogate of the nonlinearity


@dataclass
class PolyFit:
    """Chebyshev-based polynomial surrogate with a measured sup-error bound."""

    power_coeffs: np.ndarray  # ascending powers of the raw argument
    degree: int
    alpha: float
    fit_error: float

    def __call__(self, u):
        return np.polynomial.polynomial.polyval(u, self.power_coeffs)


def chebyshev_fit(fun, alpha, max_error, max_degree=60, check_points=10000):
    """Truncated Chebyshev expansion of ``fun`` on [-alpha, alpha].

    The truncation degree is the smallest for which the sup error on a dense
    grid stays below ``max_error``; the measured error is stored as the
    certificate. Raises when ``max_degree`` is not enough.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    cheb = Chebyshev.interpolate(fun, max_degree + 10, domain=[-alpha, alpha])
    grid = np.linspace(-alpha, alpha, check_points)
    target = np.asarray(fun(grid), dtype=float)
    for deg in range(0, max_degree + 1):
        trunc = Chebyshev(cheb.coef[:deg + 1], domain=[-alpha, alpha])
        err = float(np.max(np.abs(trunc(grid) - target)))
        if err <= max_error:
            power = trunc.convert(kind=Polynomial)
            return PolyFit(np.asarray(power.coef, dtype=float), deg, alpha, err)
    raise OrbitSpaceError(
        f"degree cap {max_degree} reached before error {max_error:g}")


def sigmoid_for_kind(kind, mu=0.0, theta=0.0):
    if kind == "standard":
        return expit
    if kind == "centered":
        return lambda u: expit(u) - 0.5
    if kind == "homotopy":
        return lambda u: expit(u) - 0.5 + mu * (0.5 - theta)
    raise ValueError(f"unknown sigmoid kind {kind!r}")


# ---------------------------------------------------------------------------
# exact frequency-zero monomial reduction
#
# Monomials of the expanded surrogate are keyed (a, p, q, r, s) for
# v0^a z1^p conj(z1)^q z2^r conj(z2)^s; the net rotation frequency is
# e = p - q + 2(r - s). Invariant cofactors are rewritten in (pi1, pi2, pi3)
# with zeta = z1^2 conj(z2) satisfying zeta + conj(zeta) = 2 pi3 and
# |zeta|^2 = pi1^2 pi2.


def _pp_add(dst, src, scale=1.0):
    for key, c in src.items():
        dst[key] = dst.get(key, 0.0) + scale * c


def _pp_mul_mono(poly, dm, dn, dl, scale=1.0):
    return {(m + dm, n + dn, l + dl): c * scale for (m, n, l), c in poly.items()}


@lru_cache(maxsize=8)
def _zeta_tables(dmax):
    """Reduction tables for powers of zeta against the slot bases.

    re[d]      : Re(zeta^d) as a pi-polynomial
    z1z[d]     : z1 zeta^d            = A z1 + B conj(z1) z2
    z1bz2z[d]  : conj(z1) z2 zeta-bar^d = C conj(z1) z2 + D z1
    z1sqz[d]   : z1^2 zeta^d          = E z1^2 + F z2
    z2z[d]     : z2 zeta-bar^d        = G z2 + H z1^2
    """
    one = {(0, 0, 0): 1.0}
    zero = {}
    re = [one, {(0, 0, 1): 1.0}]
    ab = [(one, zero)]
    cd = [(one, zero)]
    ef = [(one, zero)]
    gh = [(one, zero)]
    for d in range(1, dmax + 1):
        if d >= 2:
            nxt = {}
            _pp_add(nxt, _pp_mul_mono(re[d - 1], 0, 0, 1, 2.0))
            _pp_add(nxt, _pp_mul_mono(re[d - 2], 2, 1, 0, -1.0))
            re.append(nxt)
        a_prev, b_prev = ab[d - 1]
        a_new, b_new = {}, {}
        _pp_add(a_new, _pp_mul_mono(a_prev, 0, 0, 1, 2.0))   # 2 pi3 A
        _pp_add(a_new, _pp_mul_mono(b_prev, 1, 1, 0, 1.0))   # pi1 pi2 B
        _pp_add(b_new, _pp_mul_mono(a_prev, 1, 0, 0, -1.0))  # -pi1 A
        ab.append((a_new, b_new))
        c_prev, d_prev = cd[d - 1]
        c_new, d_new = {}, {}
        _pp_add(c_new, _pp_mul_mono(c_prev, 0, 0, 1, 2.0))   # 2 pi3 C
        _pp_add(c_new, _pp_mul_mono(d_prev, 1, 0, 0, 1.0))   # pi1 D
        _pp_add(d_new, _pp_mul_mono(c_prev, 1, 1, 0, -1.0))  # -pi1 pi2 C
        cd.append((c_new, d_new))
        e_prev, f_prev = ef[d - 1]
        e_new, f_new = {}, {}
        _pp_add(e_new, _pp_mul_mono(e_prev, 0, 0, 1, 2.0))   # 2 pi3 E
        _pp_add(e_new, _pp_mul_mono(f_prev, 0, 1, 0, 1.0))   # pi2 F
        _pp_add(f_new, _pp_mul_mono(e_prev, 2, 0, 0, -1.0))  # -pi1^2 E
        ef.append((e_new, f_new))
        g_prev, h_prev = gh[d - 1]
        g_new, h_new = {}, {}
        _pp_add(g_new, _pp_mul_mono(g_prev, 0, 0, 1, 2.0))   # 2 pi3 G
        _pp_add(g_new, _pp_mul_mono(h_prev, 2, 0, 0, 1.0))   # pi1^2 H
        _pp_add(h_new, _pp_mul_mono(g_prev, 0, 1, 0, -1.0))  # -pi2 G
        gh.append((g_new, h_new))
    while len(re) <= dmax:
        re.append({})
    return re, ab, cd, ef, gh


class _SlotPoly:
    """Polynomial in (v0, pi1, pi2, pi3) stored for fast vector evaluation."""

    def __init__(self, terms):
        self.terms = dict(terms)
        if terms:
            keys = np.array(list(terms.keys()), dtype=np.int64)
            self.exps = keys
            self.coeffs = np.array([terms[tuple(k)] for k in keys], dtype=float)
        else:
            self.exps = np.zeros((0, 4), dtype=np.int64)
            self.coeffs = np.zeros(0)

    def __call__(self, v0, pi1, pi2, pi3):
        if self.coeffs.size == 0:
            return 0.0
        vals = (np.power(v0, self.exps[:, 0]) * np.power(pi1, self.exps[:, 1])
                * np.power(pi2, self.exps[:, 2]) * np.power(pi3, self.exps[:, 3]))
        return float(np.dot(self.coeffs, vals))


def _reduce_power(xj, dmax):
    """Split one power of the inner linear form into the five reduced slots."""
    re, ab, cd, ef, gh = _zeta_tables(dmax)
    slots = {name: {} for name in ("b0", "a1", "b1", "c2", "d2")}

    def put(name, a, pipoly, scale):
        for (m, n, l), c in pipoly.items():
            key = (a, m, n, l)
            slots[name][key] = slots[name].get(key, 0.0) + scale * c

    for (a, p, q, r, s), coeff in xj.items():
        e = p - q + 2 * (r - s)
        if e == 0:
            if p >= q:
                d = s - r
                put("b0", a, _pp_mul_mono(re[d], q, r, 0), coeff)
            else:
                d = r - s
                put("b0", a, _pp_mul_mono(re[d], p, s, 0), coeff)
        elif e == 1:
            if p > q:
                d = (p - q - 1) // 2
                apoly, bpoly = ab[d]
                put("a1", a, _pp_mul_mono(apoly, q, r, 0), coeff)
                put("b1", a, _pp_mul_mono(bpoly, q, r, 0), coeff)
            else:
                if q < 1 or r < 1:
                    raise OrbitSpaceError(
                        f"monomial {(a, p, q, r, s)} fails the equivariant "
                        "factorization")
                d = (q - p - 1) // 2
                cpoly, dpoly = cd[d]
                put("b1", a, _pp_mul_mono(cpoly, p, s, 0), coeff)
                put("a1", a, _pp_mul_mono(dpoly, p, s, 0), coeff)
        elif e == 2:
            k = (p - q) // 2
            if 2 * k != p - q:
                raise OrbitSpaceError(
                    f"monomial {(a, p, q, r, s)} fails the equivariant "
                    "factorization")
            if k >= 1:
                epoly, fpoly = ef[k - 1]
                put("d2", a, _pp_mul_mono(epoly, q, r, 0), coeff)
                put("c2", a, _pp_mul_mono(fpoly, q, r, 0), coeff)
            elif k == 0:
                put("c2", a, {(p, s, 0): 1.0}, coeff)
            else:
                gpoly, hpoly = gh[-k]
                put("c2", a, _pp_mul_mono(gpoly, p, s, 0), coeff)
                put("d2", a, _pp_mul_mono(hpoly, p, s, 0), coeff)
    return slots


class ReducedSystem:
    """Reduced invariant functions of the N=2 model for a polynomial surrogate.

    Holds, for every power j of the inner field expansion, the five reduced
    slot polynomials; assembling at a gain weights them with c_j lambda^j
    where c_j are the surrogate's power coefficients. The gain factors out of
    the inner field, so a single reduction serves every lambda.
    """

    def __init__(self, poly_fit, spec):
        if spec.n_modes != 2:
            raise ValueError("orbit-space reduction is for n_modes == 2")
        if spec.j_abs(1) == 0 or spec.j_abs(2) == 0:
            raise ValueError("needs |J1| > 0 and |J2| > 0")
        self.fit = poly_fit
        self.spec = spec
        self.degree = len(poly_fit.power_coeffs) - 1
        c1 = math.sqrt(spec.j_abs(1)) / 2.0
        c2 = math.sqrt(spec.j_abs(2)) / 2.0
        x = {
            (1, 0, 0, 0, 0): 1.0,
            (0, 1, 0, 0, 0): c1,
            (0, 0, 1, 0, 0): c1,
            (0, 0, 0, 1, 0): c2,
            (0, 0, 0, 0, 1): c2,
        }
        dmax = self.degree // 3 + 2
        powers = [{(0, 0, 0, 0, 0): 1.0}]
        for _ in range(self.degree):
            nxt = {}
            for key, c in powers[-1].items():
                for dkey, dc in x.items():
                    nk = tuple(k + d for k, d in zip(key, dkey))
                    nxt[nk] = nxt.get(nk, 0.0) + c * dc
            powers.append(nxt)
        self.slots = []
        for j in range(self.degree + 1):
            red = _reduce_power(powers[j], dmax)
            self.slots.append({name: _SlotPoly(terms)
                               for name, terms in red.items()})
        self._gain_cache = {}

    def _weights(self, lam):
        j = np.arange(self.degree + 1)
        return self.fit.power_coeffs * lam ** j

    def _at_gain(self, lam):
        """Merged evaluator at a fixed gain; cached since continuation and
        integration hit the same gain many times."""
        cached = self._gain_cache.get(lam)
        if cached is not None:
            return cached
        merged = self.assemble(lam)
        keys = sorted(set().union(*(m.keys() for m in merged.values())))
        exps = np.array(keys, dtype=np.int64).reshape(len(keys), 4)
        coeffs = np.zeros((5, len(keys)))
        for row, name in enumerate(("b0", "a1", "b1", "c2", "d2")):
            for i, key in enumerate(keys):
                coeffs[row, i] = merged[name].get(key, 0.0)
        cached = (exps, coeffs)
        if len(self._gain_cache) > 64:
            self._gain_cache.clear()
        self._gain_cache[lam] = cached
        return cached

    def evaluate(self, lam, v0, pi1, pi2, pi3):
        """(B0_tilde, a, b, c, d) at a point, for the given gain.

        a and c include the -1 of the relaxation term, matching the
        equivariant split of -z_k + B_k.
        """
        exps, coeffs = self._at_gain(lam)
        vals = (np.power(v0, exps[:, 0]) * np.power(pi1, exps[:, 1])
                * np.power(pi2, exps[:, 2]) * np.power(pi3, exps[:, 3]))
        sums = coeffs @ vals
        spec = self.spec
        s1 = spec.j_sign(1) * math.sqrt(spec.j_abs(1))
        s2 = spec.j_sign(2) * math.sqrt(spec.j_abs(2))
        b0 = spec.j0_sign * sums[0]
        a = -1.0 + s1 * sums[1]
        b = s1 * sums[2]
        c = -1.0 + s2 * sums[3]
        d = s2 * sums[4]
        return b0, a, b, c, d

    def assemble(self, lam):
        """Merged monomial tables at a fixed gain (for serialization)."""
        w = self._weights(lam)
        merged = {name: {} for name in ("b0", "a1", "b1", "c2", "d2")}
        for j in range(self.degree + 1):
            if w[j] == 0.0:
                continue
            for name in merged:
                for key, c in self.slots[j][name].terms.items():
                    merged[name][key] = merged[name].get(key, 0.0) + w[j] * c
        return merged

    def to_json(self, path, lam):
        merged = self.assemble(lam)
        doc = {
            "metadata": {
                "degree": self.degree,
                "alpha": self.fit.alpha,
                "fit_error": self.fit.fit_error,
                "gain": lam,
                "j_weights": list(self.spec.j_weights),
                "j0_sign": self.spec.j0_sign,
            },
            "functions": {
                name: [[*key, coeff] for key, coeff in sorted(terms.items())]
                for name, terms in merged.items()
            },
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)


def reduce_invariants(poly_fit, spec):
    """Build the reduced system for a surrogate polynomial and an N=2 model."""
    return ReducedSystem(poly_fit, spec)


# ---------------------------------------------------------------------------
# quadrature + gauge oracle


def invariant_oracle_at(v0, z1, z2, spec, nonlinearity=None):
    """(B0_tilde, a, b, c, d) from quadrature at an explicit representative.

    Solves the 2x2 real systems of the equivariant split

        -z1 + B1 = a z1 + b conj(z1) z2,   -z2 + B2 = c z2 + d z1^2,

    well-posed whenever Im(z1^2 conj(z2)) != 0 (strictly interior orbit).
    The output is a function of the invariants only, so any group translate
    of (z1, z2) gives the same answer; that invariance is itself a test.
    """
    kern = _kernel(spec, nonlinearity)
    m0, mk = kern.projections(v0, np.array([z1, z2]))
    s1 = spec.j_sign(1) * math.sqrt(spec.j_abs(1))
    s2 = spec.j_sign(2) * math.sqrt(spec.j_abs(2))
    b0 = spec.j0_sign * m0
    w1 = -z1 + s1 * mk[0]
    w2 = -z2 + s2 * mk[1]
    u1 = np.conj(z1) * z2
    a, b = np.linalg.solve(
        np.array([[z1.real, u1.real], [z1.imag, u1.imag]]),
        np.array([w1.real, w1.imag]))
    u2 = z1 * z1
    c, d = np.linalg.solve(
        np.array([[z2.real, u2.real], [z2.imag, u2.imag]]),
        np.array([w2.real, w2.imag]))
    return b0, float(a), float(b), float(c), float(d)


def invariant_oracle(v0, pt_or_pis, spec, nonlinearity=None):
    """invariant_oracle_at evaluated at the canonical gauge representative of
    a strictly interior orbit. Independent of the monomial engine."""
    if isinstance(pt_or_pis, OrbitPoint):
        pi1, pi2, pi3 = pt_or_pis.pi1, pt_or_pis.pi2, pt_or_pis.pi3
    else:
        pi1, pi2, pi3 = pt_or_pis
    z1, z2 = gauge_representative(pi1, pi2, pi3)
    return invariant_oracle_at(v0, z1, z2, spec, nonlinearity)


# ---------------------------------------------------------------------------
# orbit-space dynamics and equilibria


def orbit_rhs(point, rsys, lam, theta=0.0, eps_i0=0.0, printed_pi3=False):
    """Time derivative on the orbit space.

    The third equation uses the form obtained by differentiating
    pi3 = Re(z1^2 conj(z2)) under the equivariant split,

        pi3' = (2a + c) pi3 + 2 b pi1 pi2 + d pi1^2;

    ``printed_pi3`` switches the 2 b pi1 pi2 term to 2 c pi1 pi2 for
    comparison with the alternative form.
    """
    v0, pi1, pi2, pi3 = point
    b0, a, b, c, d = rsys.evaluate(lam, v0, pi1, pi2, pi3)
    dv0 = -v0 + b0 - theta + eps_i0
    dpi1 = 2.0 * a * pi1 + 2.0 * b * pi3
    dpi2 = 2.0 * c * pi2 + 2.0 * d * pi3
    mixed = (2.0 * c if printed_pi3 else 2.0 * b) * pi1 * pi2
    dpi3 = (2.0 * a + c) * pi3 + mixed + d * pi1 ** 2
    return np.array([dv0, dpi1, dpi2, dpi3])


def orbit_integrate(point0, rsys, lam, t_end, dt=0.01, theta=0.0,
                    printed_pi3=False, membership_tol=1e-6):
    """Fixed-step RK4 on the orbit space; rejects trajectories that leave the
    orbit space by more than ``membership_tol``."""
    y = np.asarray(point0, dtype=float).copy()
    n_steps = int(round(t_end / dt))
    times = [0.0]
    path = [y.copy()]
    f = lambda p: orbit_rhs(p, rsys, lam, theta=theta, printed_pi3=printed_pi3)
    for i in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        scale = max(1.0, np.max(np.abs(y[1:])) ** 1.5)
        if not orbit_membership(y[1], y[2], y[3], tol=membership_tol * scale):
            raise OrbitSpaceError(
                f"left the orbit space at t={(i + 1) * dt:g}: {y}")
        times.append((i + 1) * dt)
        path.append(y.copy())
    return np.array(times), np.array(path)


def trivial_bifurcation_gains(rsys, lam_max=10.0):
    """(lambda_1, lambda_2): zeros of a and c along the trivial branch."""
    def a_of(lam):
        return rsys.evaluate(lam, 0.0, 0.0, 0.0, 0.0)[1]

    def c_of(lam):
        return rsys.evaluate(lam, 0.0, 0.0, 0.0, 0.0)[3]

    lam1 = _bracket_root(a_of, 1e-3, lam_max)
    lam2 = _bracket_root(c_of, 1e-3, lam_max)
    return lam1, lam2


def _bracket_root(fun, lo, hi, n=400):
    xs = np.linspace(lo, hi, n)
    vals = np.array([fun(x) for x in xs])
    for i in range(n - 1):
        if vals[i] * vals[i + 1] < 0:
            return brentq(fun, xs[i], xs[i + 1], xtol=1e-12)
    raise OrbitSpaceError("no sign change for bifurcation gain in range")


def mode1_residual(rsys, theta=0.0):
    """Equilibrium system of the first bifurcated family (pi2 = pi3 = 0):
    unknowns (v0, pi1), equations (v0 balance, a = 0)."""
    def residual(u, lam):
        v0, pi1 = u
        b0, a, _, _, _ = rsys.evaluate(lam, v0, pi1, 0.0, 0.0)
        return np.array([-v0 + b0 - theta, a])
    return residual


def mode2_residual(rsys, theta=0.0):
    """Equilibrium system of the second family (pi1 = pi3 = 0)."""
    def residual(u, lam):
        v0, pi2 = u
        b0, _, _, c, _ = rsys.evaluate(lam, v0, 0.0, pi2, 0.0)
        return np.array([-v0 + b0 - theta, c])
    return residual


def orbit_continue(rsys, family, lam_start, lam_range, cfg=None, theta=0.0,
                   seed=None, orbit_tol=1e-7):
    """Continue an equilibrium family of the orbit-space system in the gain.

    ``family`` is "mode1" or "mode2". The seed defaults to a small-amplitude
    state just past the corresponding trivial-branch bifurcation. Orbit-space
    membership (the relevant pi >= -tol) is asserted at every accepted point.
    """
    cfg = cfg or ContinuationConfig(ds=0.01, ds_max=0.05)
    residual = (mode1_residual if family == "mode1" else mode2_residual)(rsys, theta)
    if seed is None:
        seed = np.array([0.0, 0.01])
    branch = continue_branch(residual, seed, lam_start, lam_range, cfg,
                             param_name="lambda", direction=+1,
                             detect_folds=False)
    for pt in branch.points:
        if pt.state[1] < -orbit_tol:
            raise OrbitSpaceError(
                f"branch point leaves the orbit space: pi = {pt.state[1]:g}")
    return branch


def tuning_curve_n2(v0, pt, spec, x, clamp_tol=1e-7):
    """Activity profile reconstructed from an N=2 orbit-space equilibrium.

    Recovers the relative phase through cos(4 dphi) = pi3 / (pi1 sqrt(pi2))
    (clamped within ``clamp_tol`` of [-1, 1]); the pi2 -> 0 limit reduces to
    the single-mode profile.
    """
    from .model import CortexState, reconstruct_activity

    pi1, pi2, pi3 = (pt.pi1, pt.pi2, pt.pi3) if isinstance(pt, OrbitPoint) else pt
    if pi1 <= 0:
        raise OrbitSpaceError("no tuned curve to reconstruct at pi1 = 0")
    x = np.asarray(x, dtype=float)
    if pi2 <= clamp_tol:
        z2 = 0.0 + 0.0j
    else:
        cos4 = pi3 / (pi1 * math.sqrt(pi2))
        if abs(cos4) > 1.0 + clamp_tol:
            raise OrbitSpaceError(f"cos(4 dphi) = {cos4:g} outside [-1, 1]")
        cos4 = min(1.0, max(-1.0, cos4))
        psi = math.acos(cos4)
        z2 = math.sqrt(pi2) * complex(math.cos(psi), math.sin(psi))
    state = CortexState(v0, np.array([math.sqrt(pi1) + 0j, z2]))
    return reconstruct_activity(state, spec, None, x)
