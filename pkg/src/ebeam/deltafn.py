"""The scalar conjugation function

    delta(lam) = exp(i * int nu(s) / (s - lam) ds),  nu = -ln(1 + |r|^2) / (2 pi),

with the integral over (-inf, -lambda0) and (lambda0, inf), its small-lambda
coefficient delta1 and the endpoint data delta0, beta at +-lambda0.

Each ray is truncated where |nu| drops below NU_CUTOFF and integrated with
Gauss-Legendre panels aligned to the sweep nodes; the panel next to lambda0
is split geometrically toward lambda0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BadParams, OnContour, RangeTooNarrow
from .scattering import ScatteringData

NU_CUTOFF = 1e-12
GRADE_RATIO = 0.8
GRADE_LEVELS = 60
GL_POINTS = 8
CONTOUR_EPS = 1e-9

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_POINTS)


class ReflectionDensity:
    """Cubic splines of ln(1 + |r(s)|^2) on the positive and negative sweeps.

    Splines interpolate the sweep values exactly, so nu is lossless at the
    sweep nodes.  Each half is parametrised by |s|.
    """

    def __init__(self, sd: ScatteringData):
        lam = np.asarray(sd.lambdas, dtype=float)
        ell = np.log1p(np.abs(sd.r) ** 2)
        pos, neg = lam > 0, lam < 0
        if pos.sum() < 4 or neg.sum() < 4:
            raise RangeTooNarrow("the sweep needs at least 4 nodes on each side of 0")
        self.knots = {1: lam[pos], -1: -lam[neg][::-1]}
        self.splines = {1: CubicSpline(self.knots[1], ell[pos]),
                        -1: CubicSpline(self.knots[-1], ell[neg][::-1])}
        self.zero = bool(np.all(ell == 0))

    def covers(self, u):
        return all(k[0] <= u <= k[-1] for k in self.knots.values())

    def _ell(self, s, der=0):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for sign in (1, -1):
            sel = np.sign(s) == sign
            if np.any(sel):
                u = np.abs(s[sel])
                kn = self.knots[sign]
                v = self.splines[sign](np.clip(u, kn[0], kn[-1]), der)
                v = np.where(u > kn[-1], 0.0, v)  # beyond the sweep r is taken as 0
                out[sel] = v if der == 0 else sign * v
        return out

    def nu(self, s):
        return -np.maximum(self._ell(s), 0.0) / (2 * math.pi)

    def nu_prime(self, s):
        return -self._ell(s, der=1) / (2 * math.pi)


@dataclass(frozen=True, eq=False)
class Ray:
    """One truncated integration ray with its quadrature rule (nodes ascending)."""
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    nu: np.ndarray
    nu_prime: np.ndarray


@dataclass(frozen=True, eq=False)
class NuTable:
    lambda0: float
    s: np.ndarray
    nu: np.ndarray
    nu_prime: np.ndarray
    left: Ray
    right: Ray
    density: ReflectionDensity
    truncation: float  # |s| where the rays are cut

    @property
    def rays(self):
        return (self.left, self.right)

    def nu_at(self, s):
        return self.density.nu(s)


def _panel_edges(lambda0, knots, stop, refine):
    inner = knots[(knots > lambda0) & (knots < stop)]
    extra = [lambda0 + 1.0] if lambda0 + 1.0 < stop else []
    edges = np.unique(np.concatenate(([lambda0, stop], inner, extra)))
    edges = edges[np.concatenate(([True], np.diff(edges) > 1e-12))]
    # geometric split of the first panel toward lambda0
    levels = GRADE_LEVELS + 20 * (refine - 1)
    graded = lambda0 + (edges[1] - lambda0) * GRADE_RATIO ** np.arange(levels, 0, -1)
    edges = np.concatenate(([lambda0], graded, edges[1:]))
    if refine > 1:
        frac = np.arange(refine) / refine
        edges = np.concatenate(((edges[:-1, None] + np.diff(edges)[:, None] * frac).ravel(), edges[-1:]))
    return edges


def _gauss_rule(edges):
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (1 + _GL_X[None, :])).ravel()
    weights = (half * _GL_W[None, :]).ravel()
    return nodes, weights


def _truncation(density, lambda0):
    """|s| beyond which |nu| < NU_CUTOFF on both sides (at least lambda0 + 1)."""
    stop = lambda0 + 1.0
    for sign in (1, -1):
        kn = density.knots[sign]
        big = np.nonzero(np.abs(density.nu(sign * kn)) >= NU_CUTOFF)[0]
        if big.size:
            last = min(big[-1] + 1, kn.size - 1)
            stop = max(stop, kn[last])
    return float(stop)


def nu_table(sd, lambda0: float, refine: int = 1) -> NuTable:
    """Tabulate nu on the rays |s| > lambda0 with a mesh graded toward +-lambda0.

    ``sd`` is ScatteringData or a prebuilt ReflectionDensity.  ``refine``
    subdivides every panel (used for mesh-doubling checks).
    """
    density = sd if isinstance(sd, ReflectionDensity) else ReflectionDensity(sd)
    if not lambda0 > 0:
        raise BadParams(f"lambda0 must be positive, got {lambda0}")
    if not density.covers(lambda0):
        raise RangeTooNarrow(f"lambda0 = {lambda0:.6g} outside the sweep range")
    if int(refine) != refine or refine < 1:
        raise BadParams("refine must be a positive integer")
    stop = _truncation(density, lambda0)
    rays = {}
    for sign in (1, -1):
        edges = _panel_edges(lambda0, density.knots[sign], stop, int(refine))
        u, w = _gauss_rule(edges)
        s = sign * u
        if sign < 0:
            s, w = s[::-1], w[::-1]
        a, b = (lambda0, stop) if sign > 0 else (-stop, -lambda0)
        rays[sign] = Ray(a, b, s, w, density.nu(s), density.nu_prime(s))
    left, right = rays[-1], rays[1]
    return NuTable(lambda0,
                   np.concatenate((left.nodes, right.nodes)),
                   np.concatenate((left.nu, right.nu)),
                   np.concatenate((left.nu_prime, right.nu_prime)),
                   left, right, density, stop)


def _check_contour(nt: NuTable, lam, eps):
    if abs(lam.imag) < eps:
        x = lam.real
        for ray in nt.rays:
            if ray.a - eps <= x <= ray.b + eps:
                raise OnContour(f"lambda = {lam} lies on the jump contour")


def cauchy_integral(nt: NuTable, lam: complex, contour_eps=CONTOUR_EPS) -> complex:
    """int_rays nu(s) / (s - lam) ds with the value nu(Re lam) subtracted per ray."""
    lam = complex(lam)
    _check_contour(nt, lam, contour_eps)
    total = 0j
    for ray in nt.rays:
        x_star = min(max(lam.real, ray.a), ray.b)
        nu_star = float(nt.density.nu(np.array([x_star]))[0])
        total += np.sum(ray.weights * (ray.nu - nu_star) / (ray.nodes - lam))
        if nu_star != 0.0:
            total += nu_star * np.log((ray.b - lam) / (ray.a - lam))
    return complex(total)


def delta_eval(nt: NuTable, lam: complex, contour_eps=CONTOUR_EPS) -> complex:
    return complex(np.exp(1j * cauchy_integral(nt, lam, contour_eps)))


def delta1(nt: NuTable, lambda0: float | None = None, two_ray: bool = False) -> complex:
    """Coefficient of lam in delta(lam) = 1 + delta1 lam + O(lam^2).

    The default uses the right ray only, 2i int nu(s)/s^2 ds; ``two_ray``
    sums both rays instead (equal when nu is even).
    """
    if lambda0 is not None and not math.isclose(lambda0, nt.lambda0, rel_tol=1e-14):
        raise BadParams("lambda0 does not match the table")
    r = nt.right
    val = 2.0 * np.sum(r.weights * r.nu / r.nodes**2)
    if two_ray:
        lft = nt.left
        val = val / 2.0 + np.sum(lft.weights * lft.nu / lft.nodes**2)
    return complex(0.0, float(val))


@dataclass(frozen=True, eq=False)
class EndpointData:
    """delta near sign*lambda0: delta(lam) = exp(i beta(lam)) * local_power(lam)."""
    lambda0: float
    sign: int
    nu0: float
    delta0: complex
    beta_fn: Callable[[complex], complex]
    local_power: Callable[[complex], complex]


def endpoint_data(nt: NuTable, lambda0: float | None = None, sign: int = 1) -> EndpointData:
    """Endpoint data at sign*lambda0.

    beta(lam) = +-nu0 ln(lambda0 + 1 -+ lam) + int (nu - chi nu0)/(s - lam) ds, where
    chi is the indicator of the unit interval adjoining sign*lambda0.  The log
    arguments are chosen positive at lam = sign*lambda0, so beta is real there
    and delta0 = exp(i beta) is unimodular.  The matching local factor is
    (lambda0 - lam)^(-i nu0) on the plus side and (lam + lambda0)^(i nu0) on the
    minus side, both with the principal branch (cut along the ray itself).
    """
    if sign not in (1, -1):
        raise BadParams("sign must be +1 or -1")
    if lambda0 is not None and not math.isclose(lambda0, nt.lambda0, rel_tol=1e-14):
        raise BadParams("lambda0 does not match the table")
    l0 = nt.lambda0
    end = sign * l0
    nu0 = float(nt.density.nu(np.array([end]))[0])
    near = nt.right if sign > 0 else nt.left
    far = nt.left if sign > 0 else nt.right
    chi = (np.abs(near.nodes) < l0 + 1.0).astype(float)

    def beta_fn(lam):
        lam = complex(lam)
        if abs(lam.imag) < CONTOUR_EPS and sign * lam.real > l0 + CONTOUR_EPS:
            raise OnContour(f"lambda = {lam} lies on the ray")
        val = np.sum(far.weights * far.nu / (far.nodes - lam))
        val += np.sum(near.weights * (near.nu - chi * nu0) / (near.nodes - lam))
        if sign > 0:
            val += nu0 * np.log(l0 + 1.0 - lam)
        else:
            val += -nu0 * np.log(lam + l0 + 1.0)
        return complex(val)

    if sign > 0:
        def local_power(lam):
            return complex(np.exp(-1j * nu0 * np.log(l0 - complex(lam))))
    else:
        def local_power(lam):
            return complex(np.exp(1j * nu0 * np.log(complex(lam) + l0)))

    delta0 = complex(np.exp(1j * beta_fn(end)))
    return EndpointData(l0, sign, nu0, delta0, beta_fn, local_power)


def log_moment(nt: NuTable, center: float) -> float:
    """sum over rays of int ln|s - center| nu'(s) ds (a Stieltjes integral against nu)."""
    total = 0.0
    for ray in nt.rays:
        total += float(np.sum(ray.weights * np.log(np.abs(ray.nodes - center)) * ray.nu_prime))
    return total


def write_csv(nt: NuTable, path):
    with open(path, "w", newline="") as fh:
        fh.write("s,nu,nu_prime\n")
        for s, a, b in zip(nt.s, nt.nu, nt.nu_prime):
            fh.write(f"{float(s)!r},{float(a)!r},{float(b)!r}\n")
