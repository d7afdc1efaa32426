"""Parabolic-cylinder local model at the stationary points.

Only the closed-form first-moment entries M1_12 and M1_21 are evaluated:

    M1_12 = sqrt(2 pi) exp(-3 pi i/4 + pi nu/2) / (i conj(r0) Gamma(i nu))
    M1_21 = i sqrt(2 pi) exp(-pi i/4 + pi nu/2) / (r0 Gamma(-i nu))

with the model at -lambda0 obtained as M1(-lambda0) = -conj(M1(lambda0)).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .deltafn import EndpointData
from .errors import BadParams, DegenerateReflection
from .scattering import ReflectionInterpolant, ScatteringData

_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
])


def _loggamma_right(z):
    z = z - 1.0
    x = _LANCZOS[0] + sum(_LANCZOS[i] / (z + i) for i in range(1, len(_LANCZOS)))
    t = z + _LANCZOS_G + 0.5
    return 0.5 * np.log(2 * np.pi) + (z + 0.5) * np.log(t) - t + np.log(x)


def loggamma(z):
    """Complex log Gamma by the Lanczos approximation (g = 7, 9 terms).

    Uses the reflection formula for Re z < 0.5.  The imaginary part is a
    continuous branch along the imaginary axis (away from z = 0).
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    left = z.real < 0.5
    if np.any(left):
        zl = z[left]
        out[left] = np.log(np.pi) - np.log(np.sin(np.pi * zl)) - _loggamma_right(1.0 - zl)
    if np.any(~left):
        out[~left] = _loggamma_right(z[~left])
    return out if out.ndim else complex(out)


def gamma(z):
    return np.exp(loggamma(z))


def arg_gamma_imaginary(nu: float) -> float:
    """arg Gamma(i nu), continuous in nu on either side of 0."""
    if nu == 0:
        raise DegenerateReflection("Gamma(i nu) has a pole at nu = 0")
    return float(np.imag(loggamma(1j * nu)))


def r0_factor(sd, ed: EndpointData, lambda0: float, t: float) -> complex:
    """r0 = r(lambda0) delta0^-2 exp(16 i t lambda0^3) exp(i nu0 ln(48 t lambda0)).

    ``sd`` may be ScatteringData or a ReflectionInterpolant.
    """
    if not t > 0 or not lambda0 > 0:
        raise BadParams("need t > 0 and lambda0 > 0")
    interp = sd if isinstance(sd, ReflectionInterpolant) else ReflectionInterpolant(sd, 1)
    r = complex(interp(lambda0))
    phase = 16.0 * t * lambda0**3 + ed.nu0 * math.log(48.0 * t * lambda0)
    return r * ed.delta0 ** (-2) * cmath.exp(1j * phase)


@dataclass(frozen=True)
class LocalModelData:
    r0: complex
    nu0: float
    M1_12: complex
    M1_21: complex
    side: str

    @property
    def alpha_pc(self) -> complex:
        # coefficient constants of the model ODE, named apart from beta(lam, +-lambda0)
        return 1j * self.M1_21

    @property
    def beta_pc(self) -> complex:
        return -1j * self.M1_12


def local_model_M1(r0: complex, nu0: float, side: str = "plus_lambda0") -> LocalModelData:
    if side not in ("plus_lambda0", "minus_lambda0"):
        raise BadParams(f"unknown side {side!r}")
    if r0 == 0 or nu0 == 0:
        raise DegenerateReflection("zero reflection: the local model is vacuous")
    lg_p = complex(loggamma(1j * nu0))
    lg_m = complex(loggamma(-1j * nu0))
    pref = math.sqrt(2 * math.pi)
    m12 = pref * cmath.exp(-0.75j * math.pi + 0.5 * math.pi * nu0 - lg_p) / (1j * r0.conjugate())
    m21 = 1j * pref * cmath.exp(-0.25j * math.pi + 0.5 * math.pi * nu0 - lg_m) / r0
    if side == "minus_lambda0":
        m12, m21 = -m12.conjugate(), -m21.conjugate()
    return LocalModelData(complex(r0), float(nu0), m12, m21, side)


def local_model_pair(sd: ScatteringData, ed: EndpointData, lambda0: float, t: float):
    r0 = r0_factor(sd, ed, lambda0, t)
    plus = local_model_M1(r0, ed.nu0, "plus_lambda0")
    return plus, local_model_M1(r0, ed.nu0, "minus_lambda0")
