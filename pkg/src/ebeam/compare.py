"""Residuals between the direct PDE solution and the asymptotic formula."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import AsymptoticModel, AsymptoticOptions
from .errors import BadParams
from .phase import check_region
from .scattering import ScatteringData


@dataclass(frozen=True)
class TimeResidual:
    t: float
    x_lo: float
    x_hi: float
    n_points: int
    max_residual: float
    l2_residual: float
    signal_amplitude: float  # sqrt(2) * RMS of q_num, no model input
    fitted_amplitude: float  # q_num fitted to the asymptotic envelope and phase
    fitted_phase_offset: float
    asymptotic_amplitude: float  # envelope at the window centre
    zero_crossing_offset: float  # max |shift| / local wavelength; NaN if no crossings


@dataclass
class CompareReport:
    window: tuple
    variant: str
    coordinate_mode: str
    times: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    signal_exponent: float = math.nan
    residual_exponent: float = math.nan
    fitted_amplitude_exponent: float = math.nan
    residual_decreasing: bool = False
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return _finite_or_none(d)


def _finite_or_none(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    return obj


def zero_crossings(x, q):
    """Linearly interpolated sign changes of q."""
    x, q = np.asarray(x), np.asarray(q)
    s = np.sign(q)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return x[idx] - q[idx] * (x[idx + 1] - x[idx]) / (q[idx + 1] - q[idx])


def crossing_offset(x, q_num, q_asym, wavelength):
    """Largest distance from a crossing of q_num to the nearest crossing of
    q_asym, in units of the local wavelength (callable of x)."""
    zn, za = zero_crossings(x, q_num), zero_crossings(x, q_asym)
    if zn.size == 0 or za.size == 0:
        return math.nan
    near = np.min(np.abs(zn[:, None] - za[None, :]), axis=1)
    return float(np.max(near / wavelength(zn)))


def _power_law_exponent(t, v):
    t, v = np.asarray(t, float), np.asarray(v, float)
    if t.size < 2 or np.any(~np.isfinite(v)) or np.any(v <= 0):
        return math.nan
    return float(np.polyfit(np.log(t), np.log(v), 1)[0])


def residual_at(x, q_num, t, model: AsymptoticModel, window) -> tuple[TimeResidual, dict]:
    """Residual statistics on x/t in ``window`` for one time."""
    lo, hi = window
    sel = (x >= lo * t) & (x <= hi * t)
    if np.count_nonzero(sel) < 4:
        raise BadParams(f"window {window} holds fewer than 4 grid points at t = {t}")
    xs, qn = x[sel], q_num[sel]
    sl = model.slice(xs, t)
    qa = sl["q_asym"]
    res = qn - qa
    h = float(xs[1] - xs[0])
    amp_env = sl["amplitude"]
    centre = 0.5 * (lo + hi) * t
    env_c = float(np.interp(centre, xs, amp_env))
    ok = amp_env > 0
    if np.count_nonzero(ok) >= 2 and env_c > 0:
        ph = sl["phase"][ok]
        g = amp_env[ok] / env_c
        basis = np.vstack((g * np.sin(ph), g * np.cos(ph))).T
        (a, b), *_ = np.linalg.lstsq(basis, qn[ok], rcond=None)
        fitted, offset = math.hypot(a, b), math.atan2(b, a)
    else:
        fitted, offset = 0.0, math.nan

    def wavelength(z):
        # local wavelength pi / lambda0 with lambda0 = sqrt(x / 12 t)
        return np.pi / np.sqrt(model.opts.coordinate(np.asarray(z)) / (12.0 * t))

    tr = TimeResidual(
        t=float(t), x_lo=float(xs[0]), x_hi=float(xs[-1]), n_points=int(xs.size),
        max_residual=float(np.max(np.abs(res))),
        l2_residual=float(math.sqrt(h * np.sum(res**2))),
        signal_amplitude=float(math.sqrt(2.0 * np.mean(qn**2))),
        fitted_amplitude=float(fitted), fitted_phase_offset=float(offset),
        asymptotic_amplitude=env_c,
        zero_crossing_offset=crossing_offset(xs, qn, qa, wavelength),
    )
    overlay = {"x": xs, "q_num": qn, "q_asym": qa, "residual": res}
    return tr, overlay


def compare_snapshots(x, snapshots: dict, sd: ScatteringData, window=(2.0, 4.0),
                      opts: AsymptoticOptions | None = None):
    """Compare every snapshot {t: q(x, t)}; returns (CompareReport, overlays)."""
    opts = opts or AsymptoticOptions()
    lo, hi = window
    if not lo < hi:
        raise BadParams("window must satisfy lo < hi")
    for ratio in (lo, hi):
        check_region(ratio, opts.n_sim)
    model = AsymptoticModel(sd, opts)
    x = np.asarray(x, dtype=float)
    report = CompareReport(tuple(window), opts.variant, opts.coordinate_mode)
    overlays = {}
    for t in sorted(snapshots):
        tr, ov = residual_at(x, np.asarray(snapshots[t]), float(t), model, window)
        report.times.append(float(t))
        report.residuals.append(tr)
        overlays[float(t)] = ov
    ts = report.times
    report.signal_exponent = _power_law_exponent(ts, [r.signal_amplitude for r in report.residuals])
    report.residual_exponent = _power_law_exponent(ts, [r.max_residual for r in report.residuals])
    report.fitted_amplitude_exponent = _power_law_exponent(ts, [r.fitted_amplitude for r in report.residuals])
    mr = [r.max_residual for r in report.residuals]
    report.residual_decreasing = bool(len(mr) > 1 and all(b < a for a, b in zip(mr, mr[1:])))
    return report, overlays


def compare(state, sd: ScatteringData, window=(2.0, 4.0), cfg: AsymptoticOptions | None = None):
    """Compare a PdeState: all stored snapshots, or the final profile if none."""
    snaps = dict(state.snapshots) if state.snapshots else {state.t: state.profile.q}
    return compare_snapshots(state.profile.x, snaps, sd, window, cfg)[0]


def write_overlay_csv(path, overlay: dict, t: float, header_comment: str | None = None):
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("x,t,q_num,q_asym,residual\n")
        for x, a, b, r in zip(overlay["x"], overlay["q_num"], overlay["q_asym"], overlay["residual"]):
            fh.write(f"{float(x)!r},{float(t)!r},{float(a)!r},{float(b)!r},{float(r)!r}\n")
