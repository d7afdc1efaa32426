"""Jost solutions, scattering coefficients a(lambda), b(lambda) and r = b/a.

The x-part of the gauge-transformed Lax pair is integrated as an ODE,

    mu_x = i*lam*sqrt(m) [sigma3, mu] + U mu,   U = [[0, u], [-u, 0]],
    u = q_xx / (2 m),

with mu -> I at the side's end of the grid.  Many spectral values share one
adaptive integration: the unknowns of every lambda are stacked into a single
state vector (the equations stay uncoupled).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import AssumptionViolated, BadParams, NonConvergence, OutOfRange, RangeTooNarrow
from .profile import Profile, charges

ODE_TOL = 1e-10
UNITARITY_TOL = 1e-6
A_FLOOR = 0.05
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class JostSolution:
    lam: complex
    side: str
    x: np.ndarray
    values: np.ndarray  # (len(x), 2, 2)
    p_of_x: np.ndarray

    def det(self):
        v = self.values
        return v[:, 0, 0] * v[:, 1, 1] - v[:, 0, 1] * v[:, 1, 0]


@dataclass(frozen=True, eq=False)
class ScatteringData:
    lambdas: np.ndarray
    a: np.ndarray
    b: np.ndarray
    r: np.ndarray
    min_abs_a: float
    meta: dict = field(default_factory=dict)

    def unitarity_defect(self):
        return np.abs(np.abs(self.a) ** 2 + np.abs(self.b) ** 2 - 1.0)

    def positive(self):
        sel = self.lambdas > 0
        return self.lambdas[sel], self.r[sel]

    def negative(self):
        sel = self.lambdas < 0
        return self.lambdas[sel], self.r[sel]

    def to_json(self) -> dict:
        return {
            "lambda": [float(v) for v in self.lambdas],
            "a_re": [float(v) for v in self.a.real],
            "a_im": [float(v) for v in self.a.imag],
            "b_re": [float(v) for v in self.b.real],
            "b_im": [float(v) for v in self.b.imag],
            "r_re": [float(v) for v in self.r.real],
            "r_im": [float(v) for v in self.r.imag],
            "min_abs_a": float(self.min_abs_a),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScatteringData":
        lam = np.asarray(obj["lambda"], dtype=float)
        a = np.asarray(obj["a_re"]) + 1j * np.asarray(obj["a_im"])
        b = np.asarray(obj["b_re"]) + 1j * np.asarray(obj["b_im"])
        r = np.asarray(obj["r_re"]) + 1j * np.asarray(obj["r_im"])
        return cls(lam, a, b, r, float(obj["min_abs_a"]), dict(obj.get("meta", {})))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ScatteringData":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True, eq=False)
class GaugeMatrix:
    values: np.ndarray  # (n, 2, 2) real rotations


def gauge(p: Profile) -> GaugeMatrix:
    """Rotation G(x) that diagonalises sigma3 + q_x sigma1."""
    sm = p.sqrt_m
    s = p.q_x / (sm + 1.0)  # (sqrt(m) - 1) / q_x, regular at q_x = 0
    pref = np.sqrt((1.0 + sm) / (2.0 * sm))
    g = np.empty((p.grid.n, 2, 2))
    g[:, 0, 0] = pref
    g[:, 0, 1] = pref * s
    g[:, 1, 0] = -pref * s
    g[:, 1, 1] = pref
    return GaugeMatrix(g)


class _Coefficients:
    """Cubic-spline interpolants of sqrt(m) and u = q_xx/(2m) on the grid."""

    def __init__(self, p: Profile):
        x = p.x
        self.x0 = float(x[0])
        self.h = p.grid.spacing
        self.n = p.grid.n
        self.sqrt_m_max = float(np.max(p.sqrt_m))
        self._cs = CubicSpline(x, p.sqrt_m).c.T.tolist()
        self._cu = CubicSpline(x, p.q_xx / (2.0 * p.m)).c.T.tolist()

    def __call__(self, xv):
        i = int((xv - self.x0) / self.h)
        i = min(max(i, 0), self.n - 2)
        d = xv - (self.x0 + i * self.h)
        a3, a2, a1, a0 = self._cs[i]
        b3, b2, b1, b0 = self._cu[i]
        return ((a3 * d + a2) * d + a1) * d + a0, ((b3 * d + b2) * d + b1) * d + b0


def _phase(p: Profile):
    """p(x) = x - c_+(x) at t = 0."""
    return p.x - charges(p).c_plus_of_x


def _integrate(coef, lams, x_start, x_stops, rtol, atol, dense_x=None):
    """Integrate from the identity at ``x_start`` through the ``x_stops``.

    Returns an array (len(x_stops), nlam, 2, 2); with ``dense_x`` the values at
    those points are returned instead (dense output of the integrator).
    """
    lams = np.asarray(lams, dtype=complex)
    nl = lams.size
    w = 2j * lams

    def rhs(x, y):
        s, u = coef(x)
        m11, m12, m21, m22 = y[:nl], y[nl:2 * nl], y[2 * nl:3 * nl], y[3 * nl:]
        ws = w * s
        return np.concatenate((u * m21, ws * m12 + u * m22, -ws * m21 - u * m11, -u * m12))

    lam_max = float(np.max(np.abs(lams))) if nl else 0.0
    max_step = 0.2 / (1.0 + lam_max * coef.sqrt_m_max)
    y = np.concatenate((np.ones(nl), np.zeros(nl), np.zeros(nl), np.ones(nl))).astype(complex)
    out = []
    x_cur = x_start
    dense_vals = None
    if dense_x is not None:
        sol = solve_ivp(rhs, (x_start, x_stops[-1]), y, method="DOP853", rtol=rtol, atol=atol,
                        max_step=max_step, t_eval=dense_x)
        if sol.status != 0:
            raise NonConvergence(f"Jost integration failed: {sol.message}", lam=lams)
        dense_vals = sol.y.T.reshape(len(dense_x), 4, nl).transpose(0, 2, 1).reshape(-1, nl, 2, 2)
        return dense_vals
    for xs in x_stops:
        if xs != x_cur:
            sol = solve_ivp(rhs, (x_cur, xs), y, method="DOP853", rtol=rtol, atol=atol,
                            max_step=max_step)
            if sol.status != 0:
                raise NonConvergence(f"Jost integration failed: {sol.message}", lam=lams)
            y = sol.y[:, -1]
            x_cur = xs
        out.append(y.reshape(4, nl).T.reshape(nl, 2, 2))
    return np.array(out)


def jost(p: Profile, lam: complex, side: str, rtol=ODE_TOL, atol=ODE_TOL) -> JostSolution:
    """Jost solution mu_plus (side='plus') or mu_minus over the whole grid."""
    if side not in ("plus", "minus"):
        raise BadParams(f"side must be 'plus' or 'minus', got {side!r}")
    coef = _Coefficients(p)
    x = p.x
    if side == "plus":
        xs = x[::-1]
        vals = _integrate(coef, [lam], xs[0], [xs[-1]], rtol, atol, dense_x=xs)[::-1, 0]
    else:
        vals = _integrate(coef, [lam], x[0], [x[-1]], rtol, atol, dense_x=x)[:, 0]
    vals = vals.copy()
    vals[0 if side == "minus" else -1] = np.eye(2)
    return JostSolution(complex(lam), side, x, vals, _phase(p))


def matching_indices(p: Profile):
    """Grid nodes nearest x = 0 and x = x_max/2 where mu_+ and mu_- are matched."""
    x = p.x
    i0 = int(np.argmin(np.abs(x)))
    i1 = int(np.argmin(np.abs(x - 0.5 * p.grid.x_max)))
    if i1 == i0:
        i1 = min(i0 + 1, p.grid.n - 1)
    return i0, i1


def _coefficients_at(mu_p, mu_m, lams, p_val):
    """a = det(mu_+[:,0], mu_-[:,1]);  b = e^{-2 i lam p} (mu_+^{-1} mu_-)_{12}."""
    a = mu_p[:, 0, 0] * mu_m[:, 1, 1] - mu_p[:, 1, 0] * mu_m[:, 0, 1]
    det_p = mu_p[:, 0, 0] * mu_p[:, 1, 1] - mu_p[:, 0, 1] * mu_p[:, 1, 0]
    s12 = (mu_p[:, 1, 1] * mu_m[:, 0, 1] - mu_p[:, 0, 1] * mu_m[:, 1, 1]) / det_p
    b = np.exp(-2j * lams * p_val) * s12
    return a, b


def scattering_batch(p: Profile, lams, rtol=ODE_TOL, atol=ODE_TOL):
    """(a, b, discrepancy) for an array of real spectral values.

    ``discrepancy`` is the largest change of (a, b) between the two matching
    points, a check of the x-independence of the Wronskian data.
    """
    lams = np.asarray(lams, dtype=float)
    if np.any(lams == 0):
        raise BadParams("lambda = 0 is excluded")
    coef = _Coefficients(p)
    x = p.x
    i0, i1 = matching_indices(p)
    lo, hi = sorted((i0, i1))
    mp = _integrate(coef, lams, x[-1], [x[hi], x[lo]], rtol, atol)
    mm = _integrate(coef, lams, x[0], [x[lo], x[hi]], rtol, atol)
    ph = _phase(p)
    a_lo, b_lo = _coefficients_at(mp[1], mm[0], lams, ph[lo])
    a_hi, b_hi = _coefficients_at(mp[0], mm[1], lams, ph[hi])
    if lo == i0:
        a, b = a_lo, b_lo
    else:
        a, b = a_hi, b_hi
    disc = np.maximum(np.abs(a_lo - a_hi), np.abs(b_lo - b_hi))
    return a, b, disc


def scattering_at(p: Profile, lam: float, rtol=ODE_TOL, atol=ODE_TOL):
    a, b, _ = scattering_batch(p, [lam], rtol, atol)
    return complex(a[0]), complex(b[0])


def spectral_grid(lambda_max=16.0, n_lambda=400, spacing=0.02, knee=4.0):
    """Positive spectral nodes: linear spacing up to ``knee``, geometric beyond.

    Half of the nodes (at most) are linear; the remainder stretch
    geometrically from ``knee`` to ``lambda_max``.
    """
    if lambda_max <= 1:
        raise BadParams("lambda_max must exceed 1")
    if lambda_max <= knee:
        n_lin = min(n_lambda, int(round(lambda_max / spacing)))
        return np.linspace(lambda_max / n_lin, lambda_max, n_lin)
    n_lin = min(int(round(knee / spacing)), n_lambda // 2)
    lin = np.linspace(knee / n_lin, knee, n_lin)
    n_geo = n_lambda - n_lin
    geo = knee * (lambda_max / knee) ** (np.arange(1, n_geo + 1) / n_geo)
    return np.concatenate((lin, geo))


def reflection_sweep(p: Profile, lambdas, a_floor=A_FLOOR, rtol=ODE_TOL, atol=ODE_TOL,
                     batch=True, meta=None) -> ScatteringData:
    """Tabulate a, b and r over strictly increasing nonzero ``lambdas``.

    With ``batch=False`` every lambda gets its own integration (same answers
    to within the ODE tolerance, much slower).
    """
    lams = np.asarray(lambdas, dtype=float)
    if lams.ndim != 1 or lams.size == 0 or np.any(np.diff(lams) <= 0):
        raise BadParams("lambdas must be a strictly increasing 1-d array")
    if np.any(lams == 0):
        raise BadParams("lambda = 0 is excluded from the sweep")
    if batch:
        # each sign gets its own integration so that the lambda -> -lambda
        # symmetry remains an independent check
        parts = [scattering_batch(p, lams[sel], rtol, atol)
                 for sel in (lams < 0, lams > 0) if np.any(sel)]
        a, b, disc = (np.concatenate(c) for c in zip(*parts))
    else:
        parts = [scattering_batch(p, [lv], rtol, atol) for lv in lams]
        a, b, disc = (np.concatenate(c) for c in zip(*parts))
    r = b / a
    min_abs_a = float(np.min(np.abs(a)))
    info = {
        "profile": dict(p.params),
        "grid": {"x_min": p.grid.x_min, "x_max": p.grid.x_max, "n": p.grid.n},
        "ode_tol": rtol,
        "a_floor": a_floor,
        "max_unitarity_defect": float(np.max(np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - 1))),
        "max_matching_discrepancy": float(np.max(disc)),
    }
    info.update(meta or {})
    sd = ScatteringData(lams, a, b, r, min_abs_a, info)
    if min_abs_a < a_floor:
        raise AssumptionViolated(
            f"min |a| = {min_abs_a:.3e} < a_floor = {a_floor}: possible discrete spectrum, "
            "outside the solitonless theory (reduce the amplitude)", min_abs_a=min_abs_a)
    return sd


def symmetric_lambdas(positive):
    positive = np.asarray(positive, dtype=float)
    return np.concatenate((-positive[::-1], positive))


def small_lambda_check(p: Profile, lam: float, rtol=ODE_TOL, atol=ODE_TOL) -> float:
    """max |mu0_pm - (I + i q sigma1 lam)| over the grid and both sides.

    mu0 is recovered from the Jost solutions by undoing the gauge rotation
    and the phase exp(i lam int_x^{+-inf} (sqrt(m) - 1) ds sigma3).
    """
    if abs(lam) > 0.1:
        raise OutOfRange(f"|lambda| = {abs(lam)} > 0.1")
    g = gauge(p).values
    ginv = np.transpose(g, (0, 2, 1))
    ch = charges(p)
    target = np.eye(2)[None] + 1j * lam * p.q[:, None, None] * SIGMA1[None]
    worst = 0.0
    for side, tail in (("plus", ch.c_plus_of_x), ("minus", -ch.c_minus_of_x)):
        mu = jost(p, lam, side, rtol, atol).values
        ph = np.exp(-1j * lam * tail)
        mu0 = ginv @ mu
        mu0[:, :, 0] *= ph[:, None]
        mu0[:, :, 1] /= ph[:, None]
        worst = max(worst, float(np.max(np.abs(mu0 - target))))
    return worst


def decay_slope(sd: ScatteringData, lo=4.0, hi=16.0) -> float:
    """Least-squares slope of log|a - 1| against log(lambda) on [lo, hi]."""
    sel = (sd.lambdas >= lo) & (sd.lambdas <= hi)
    lam = sd.lambdas[sel]
    dev = np.abs(sd.a[sel] - 1.0)
    if lam.size < 2 or np.any(dev == 0):
        return math.nan
    return float(np.polyfit(np.log(lam), np.log(dev), 1)[0])


class ReflectionInterpolant:
    """Cubic-spline interpolation of r(lambda) on one sign of the sweep.

    The modulus and the unwrapped argument are splined separately so that
    arg r is continuous in lambda.
    """

    def __init__(self, sd: ScatteringData, sign=1):
        sel = sd.lambdas > 0 if sign > 0 else sd.lambdas < 0
        lam = np.abs(sd.lambdas[sel])
        r = sd.r[sel]
        if sign < 0:
            lam, r = lam[::-1], r[::-1]
        if lam.size < 4:
            raise RangeTooNarrow("the sweep needs at least 4 nodes on each side of 0")
        self.sign = sign
        self.lo, self.hi = float(lam[0]), float(lam[-1])
        self._re = CubicSpline(lam, r.real)
        self._im = CubicSpline(lam, r.imag)
        self._arg = CubicSpline(lam, np.unwrap(np.angle(r)))

    def _u(self, lam):
        u = np.abs(np.asarray(lam, dtype=float))
        if np.any(u < self.lo) or np.any(u > self.hi):
            raise RangeTooNarrow(f"lambda outside the sweep range [{self.lo:.6g}, {self.hi:.6g}]")
        return u

    def __call__(self, lam):
        u = self._u(lam)
        return self._re(u) + 1j * self._im(u)

    def arg(self, lam):
        return self._arg(self._u(lam))
