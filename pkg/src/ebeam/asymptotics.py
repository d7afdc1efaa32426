"""Leading-order long-time solution in the oscillating region.

    q(x, t) ~ sqrt(|nu| / (12 t l^5)) * sin(16 t l^3 + L(t) + Theta),
    l = sqrt(x / (12 t)),  nu = nu(l) <= 0.

Two variants are offered.

``corrected`` (default):
    L = -nu ln(48 t l)
    Theta = -5 pi/4 + arg Gamma(i nu) - arg conj(r(l)) + 2 int_rays ln|s - l| dnu(s)
            - 2 nu ln(2 l) - 2 i l delta1

``uncorrected``:
    L = +nu ln(48 t l)
    Theta = -5 pi/4 - arg Gamma(i nu) - arg conj(r(l)) + 2 int_rays ln|s - l| dnu(s)
            + 2 i l delta1

The corrected variant solves the local model with the exponent that delta
actually has at l, (l - lam)^(-i nu); that flips the sign of nu in the log
and Gamma terms.  Integrating beta(l, l) by parts leaves the boundary term
-2 nu ln(2 l).  Evaluating at y = x - c_+ with c_+ ~ i delta1 flips the
delta1 term.  Against the direct PDE solution the corrected residual decays
like t^(-3/2) while the uncorrected variant is off by pi plus an O(nu ln t)
drift.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .deltafn import ReflectionDensity, delta1 as delta1_of, log_moment, nu_table
from .errors import BadParams, DegenerateReflection, NotAvailable
from .pcmodel import arg_gamma_imaginary
from .phase import N_SIM, check_region
from .scattering import ReflectionInterpolant, ScatteringData

R_DEGENERATE = 1e-13
MODES = ("x_based", "y_based")
VARIANTS = ("corrected", "uncorrected")


@dataclass(frozen=True)
class AsymptoticOptions:
    coordinate_mode: str = "x_based"
    n_sim: float = N_SIM
    c_total: float = 0.0  # shift used by y_based mode: y ~ x - c_total
    refine: int = 1
    variant: str = "corrected"

    def __post_init__(self):
        if self.coordinate_mode not in MODES:
            raise BadParams(f"coordinate_mode must be one of {MODES}")
        if self.variant not in VARIANTS:
            raise BadParams(f"variant must be one of {VARIANTS}")
        if not self.n_sim > 0:
            raise BadParams("n_sim must be positive")

    def coordinate(self, x):
        return x - self.c_total if self.coordinate_mode == "y_based" else x


@dataclass(frozen=True)
class AsymptoticIngredients:
    lambda_hat0: float
    t: float
    nu0: float
    delta1: complex
    arg_gamma: float
    arg_rbar: float
    log_integral: float
    theta_phase: float
    amplitude: float
    coordinate_mode: str
    variant: str = "corrected"
    summands: dict = field(default_factory=dict)

    @property
    def log_term(self) -> float:
        s = 1.0 if self.variant == "uncorrected" else -1.0
        return s * self.nu0 * math.log(48.0 * self.t * self.lambda_hat0)

    @property
    def phase(self) -> float:
        """Full argument of the sine."""
        return 16.0 * self.t * self.lambda_hat0**3 + self.log_term + self.theta_phase

    def to_json(self) -> dict:
        d = asdict(self)
        d["delta1"] = {"re": self.delta1.real, "im": self.delta1.imag}
        d["log_term"] = self.log_term
        d["phase"] = self.phase
        return d


def stationary_point(coord: float, t: float, mode: str = "x_based", n_sim: float = N_SIM) -> float:
    """sqrt(coord / (12 t)); coord is x or y according to ``mode``."""
    if mode not in MODES:
        raise BadParams(f"mode must be one of {MODES}")
    if not t > 0:
        raise BadParams(f"t must be positive, got {t}")
    check_region(coord / t, n_sim)
    return math.sqrt(coord / (12.0 * t))


def theta_summands(arg_rbar, nt, lambda_hat0, delta1, nu0, variant="corrected"):
    """The pieces of Theta, each real."""
    d1_term = 2j * lambda_hat0 * delta1
    if abs(d1_term.imag) > 1e-10:
        raise BadParams("delta1 term is not real")
    arg_g = arg_gamma_imaginary(nu0)
    parts = {
        "constant": -1.25 * math.pi,
        "gamma": -arg_g,
        "rbar": -arg_rbar,
        "log_integral": 2.0 * log_moment(nt, lambda_hat0),
        "delta1": float(d1_term.real),
    }
    if variant == "corrected":
        parts["gamma"] = arg_g
        parts["endpoint_log"] = -2.0 * nu0 * math.log(2.0 * lambda_hat0)
        parts["delta1"] = -parts["delta1"]
    elif variant != "uncorrected":
        raise BadParams(f"variant must be one of {VARIANTS}")
    return parts


def theta_big(sd, nt, ed=None, lambda_hat0=None, delta1=None, variant="corrected") -> float:
    """Theta at lambda_hat0.  ``ed`` is accepted for symmetry with the other
    ingredients but Theta does not depend on the endpoint data."""
    lambda_hat0 = nt.lambda0 if lambda_hat0 is None else lambda_hat0
    delta1 = delta1_of(nt) if delta1 is None else delta1
    interp = sd if isinstance(sd, ReflectionInterpolant) else ReflectionInterpolant(sd, 1)
    r = complex(interp(lambda_hat0))
    nu0 = float(nt.density.nu(np.array([lambda_hat0]))[0])
    if abs(r) < R_DEGENERATE or nu0 == 0:
        raise DegenerateReflection(f"r({lambda_hat0:.6g}) vanishes")
    parts = theta_summands(-float(interp.arg(lambda_hat0)), nt, lambda_hat0, delta1, nu0, variant)
    return float(sum(parts.values()))


class AsymptoticModel:
    """Scattering-data-dependent pieces built once and reused over (x, t)."""

    def __init__(self, sd: ScatteringData, opts: AsymptoticOptions | None = None):
        self.sd = sd
        self.opts = opts or AsymptoticOptions()
        self.density = ReflectionDensity(sd)
        self.interp = ReflectionInterpolant(sd, 1)

    def ingredients(self, x: float, t: float) -> AsymptoticIngredients:
        o = self.opts
        coord = o.coordinate(x)
        lam = stationary_point(coord, t, o.coordinate_mode, o.n_sim)
        r = complex(self.interp(lam))
        nu0 = float(self.density.nu(np.array([lam]))[0])
        if abs(r) < R_DEGENERATE or nu0 == 0:
            raise DegenerateReflection(f"r({lam:.6g}) vanishes; the oscillation has zero amplitude")
        nt = nu_table(self.density, lam, o.refine)
        d1 = delta1_of(nt)
        arg_rbar = -float(self.interp.arg(lam))
        parts = theta_summands(arg_rbar, nt, lam, d1, nu0, o.variant)
        amp = math.sqrt(abs(nu0) / (12.0 * t * lam**5))
        return AsymptoticIngredients(
            lambda_hat0=lam, t=t, nu0=nu0, delta1=d1, arg_gamma=arg_gamma_imaginary(nu0),
            arg_rbar=arg_rbar, log_integral=parts["log_integral"],
            theta_phase=float(sum(parts.values())), amplitude=amp,
            coordinate_mode=o.coordinate_mode, variant=o.variant, summands=parts)

    def q(self, x: float, t: float) -> float:
        try:
            ing = self.ingredients(x, t)
        except DegenerateReflection:
            return 0.0
        return ing.amplitude * math.sin(ing.phase)

    def slice(self, xs, t: float) -> dict:
        """q, amplitude and phase along a fixed-t slice (NaN phase where r vanishes)."""
        xs = np.asarray(xs, dtype=float)
        q = np.zeros_like(xs)
        amp = np.zeros_like(xs)
        ph = np.full_like(xs, np.nan)
        for i, x in enumerate(xs):
            try:
                ing = self.ingredients(x, t)
            except DegenerateReflection:
                continue
            amp[i] = ing.amplitude
            ph[i] = ing.phase
            q[i] = ing.amplitude * math.sin(ing.phase)
        return {"x": xs, "q_asym": q, "amplitude": amp, "phase": ph}


def q_asymptotic(x: float, t: float, sd: ScatteringData, cfg: AsymptoticOptions | None = None) -> float:
    return AsymptoticModel(sd, cfg).q(x, t)


def reconstruct_c_plus(ing: AsymptoticIngredients, M1_11: complex | None = None,
                       delta1_only: bool = False) -> complex:
    """Experimental estimate of c_+ at the stationary point.

    The diagonal local-model entry is not available in closed form; pass it
    explicitly or ask for the i*delta1 part alone.
    """
    if M1_11 is None:
        if not delta1_only:
            raise NotAvailable("the diagonal local-model entry M1_11 is not available; "
                               "use delta1_only=True for the i*delta1 part")
        return 1j * ing.delta1
    lam, t = ing.lambda_hat0, ing.t
    return 2.0 / lam**2 / math.sqrt(48.0 * t * lam) * complex(M1_11).imag + 1j * ing.delta1


def write_slice_csv(path, sl: dict, t: float):
    with open(path, "w", newline="") as fh:
        fh.write("x,t,q_asym,amplitude,phase\n")
        for x, q, a, p in zip(sl["x"], sl["q_asym"], sl["amplitude"], sl["phase"]):
            fh.write(f"{float(x)!r},{float(t)!r},{float(q)!r},{float(a)!r},{float(p)!r}\n")


__all__ = [
    "AsymptoticIngredients", "AsymptoticModel", "AsymptoticOptions", "VARIANTS",
    "q_asymptotic", "reconstruct_c_plus", "stationary_point", "theta_big", "write_slice_csv",
]
