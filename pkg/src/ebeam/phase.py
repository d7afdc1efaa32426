"""Oscillatory phase theta(lambda) = 4 lambda^3 - 12 lambda0^2 lambda and its stationary points."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, RegionViolation

N_SIM = 25.0


def similarity_window(n_sim=N_SIM):
    """Admissible range of the similarity variable (x/t or y/t)."""
    return (1.0 / n_sim, 12.0 * n_sim)


def check_region(ratio, n_sim=N_SIM):
    lo, hi = similarity_window(n_sim)
    if not (math.isfinite(ratio) and lo <= ratio <= hi):
        raise RegionViolation(
            f"similarity variable {ratio:.6g} outside the admissible window "
            f"[{lo:.6g}, {hi:.6g}]", window=(lo, hi))


@dataclass(frozen=True)
class PhaseContext:
    lambda0: float
    t: float
    ratio: float
    coordinate: str = "x"
    n_sim: float = N_SIM

    def __post_init__(self):
        if not self.t > 0:
            raise BadParams(f"t must be positive, got {self.t}")
        check_region(self.ratio, self.n_sim)
        if not math.isclose(self.lambda0, math.sqrt(self.ratio / 12.0), rel_tol=1e-12):
            raise BadParams("lambda0 must equal sqrt(ratio / 12)")

    @classmethod
    def from_ratio(cls, ratio, t, coordinate="x", n_sim=N_SIM):
        check_region(ratio, n_sim)
        return cls(math.sqrt(ratio / 12.0), t, ratio, coordinate, n_sim)


def theta(lam, ctx: PhaseContext):
    lam = np.asarray(lam)
    return 4.0 * lam**3 - 12.0 * ctx.lambda0**2 * lam


def theta_prime(lam, ctx: PhaseContext):
    lam = np.asarray(lam)
    return 12.0 * lam**2 - 12.0 * ctx.lambda0**2


def re_2it_theta(lam, ctx: PhaseContext):
    """Re(2 i t theta(lambda)); negative where exp(2 i t theta) decays."""
    lam = np.asarray(lam, dtype=complex)
    a, b = lam.real, lam.imag
    return -24.0 * ctx.t * (a * a - b * b / 3.0 - ctx.lambda0**2) * b
