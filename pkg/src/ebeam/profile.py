"""Sampled profiles q(x) on a uniform grid, their derivatives and charges."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .errors import BadParams, OutOfDomain, TailNotDecayed

TAIL_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise BadParams(f"need x_min < x_max, got {self.x_min}, {self.x_max}")
        if int(self.n) != self.n or self.n < 16:
            raise BadParams(f"need an integer n >= 16, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def period(self) -> float:
        # samples are treated as one period of a periodic function
        return self.n * self.spacing

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers matching ``np.fft.rfft`` ordering."""
        return 2 * np.pi * np.fft.rfftfreq(self.n, d=self.spacing)


@dataclass(frozen=True, eq=False)
class Profile:
    grid: Grid
    q: np.ndarray
    q_x: np.ndarray
    q_xx: np.ndarray
    m: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.grid.x

    @property
    def sqrt_m(self):
        return np.sqrt(self.m)


@dataclass(frozen=True, eq=False)
class ChargeDecomposition:
    c_total: float
    c_plus_of_x: np.ndarray
    c_minus_of_x: np.ndarray


def differentiate(q, grid: Grid):
    """First and second derivative by trigonometric interpolation.

    The samples are taken as one period of length ``grid.period``; this is
    exact for band-limited periodic input and spectrally accurate for
    profiles whose tails are negligible at both ends.
    """
    q = np.asarray(q, dtype=float)
    k = grid.wavenumbers()
    qh = np.fft.rfft(q)
    ik = 1j * k
    if grid.n % 2 == 0:
        # the Nyquist mode has no well-defined odd derivative
        ik[-1] = 0.0
    q_x = np.fft.irfft(ik * qh, n=grid.n)
    q_xx = np.fft.irfft(-(k**2) * qh, n=grid.n)
    return q_x, q_xx


def metric(q_x):
    return 1.0 + np.asarray(q_x) ** 2


def sqrt_m_minus_one(q_x):
    """sqrt(1 + q_x^2) - 1 without cancellation."""
    q_x = np.asarray(q_x)
    return q_x**2 / (np.sqrt(1.0 + q_x**2) + 1.0)


def from_samples(q, grid: Grid, tail_tol=TAIL_TOL, params=None) -> Profile:
    q = np.asarray(q, dtype=float)
    if q.shape != (grid.n,):
        raise BadParams(f"expected {grid.n} samples, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise BadParams("profile samples must be finite")
    q_x, q_xx = differentiate(q, grid)
    worst = max(abs(q_x[0]), abs(q_x[-1]))
    if worst >= tail_tol:
        raise TailNotDecayed(
            f"|q_x| = {worst:.3e} at the grid ends exceeds tail_tol = {tail_tol:.1e}; "
            "enlarge the domain or use a decaying profile")
    return Profile(grid, q, q_x, q_xx, metric(q_x), dict(params or {}))


def build_profile(kind: str, params: dict, grid: Grid, tail_tol=TAIL_TOL) -> Profile:
    """Build a profile of the given kind.

    ``gaussian``: q = amp * exp(-x**2 / width**2)
    ``sech``: q = amp * sech(x / width)
    ``custom_samples``: ``params["q"]`` holds the n samples
    """
    x = grid.x
    if kind in ("gaussian", "sech"):
        amp = float(params.get("amp", 0.0))
        width = float(params.get("width", 1.0))
        if width <= 0:
            raise BadParams(f"width must be positive, got {width}")
        if kind == "gaussian":
            q = amp * np.exp(-(x / width) ** 2)
        else:
            q = amp / np.cosh(x / width)
        meta = {"kind": kind, "amp": amp, "width": width}
    elif kind == "custom_samples":
        if "q" not in params:
            raise BadParams("custom_samples needs params['q']")
        q = np.asarray(params["q"], dtype=float)
        if q.shape != (grid.n,):
            raise BadParams(f"expected {grid.n} samples, got {q.shape[0] if q.ndim else 0}")
        meta = {"kind": kind}
    else:
        raise BadParams(f"unknown profile kind {kind!r}")
    return from_samples(q, grid, tail_tol=tail_tol, params=meta)


def zero_profile(grid: Grid) -> Profile:
    return build_profile("gaussian", {"amp": 0.0, "width": 1.0}, grid)


def charges(p: Profile) -> ChargeDecomposition:
    """c(x) splits into c_+ (mass right of x) and c_- (mass left of x).

    Interval contributions come from cumulative Simpson and are clipped at
    zero, so c_+ is exactly non-increasing for the non-negative density.
    """
    f = sqrt_m_minus_one(p.q_x)
    x = p.x
    cum = cumulative_simpson(f, x=x, initial=0.0)
    inc = np.maximum(np.diff(cum), 0.0)
    c_minus = np.concatenate(([0.0], np.cumsum(inc)))
    c_plus = np.concatenate((np.cumsum(inc[::-1])[::-1], [0.0]))
    c_total = float(c_minus[-1])
    return ChargeDecomposition(c_total, c_plus, c_minus)


def total_charge(p: Profile) -> float:
    return charges(p).c_total


def y_of_x(p: Profile, x: float, ch: ChargeDecomposition | None = None) -> float:
    """y = x - c_+(x)."""
    if not p.grid.x_min <= x <= p.grid.x_max:
        raise OutOfDomain(f"x = {x} outside [{p.grid.x_min}, {p.grid.x_max}]")
    ch = ch or charges(p)
    c_plus = PchipInterpolator(p.x, ch.c_plus_of_x)(x)
    return float(x - c_plus)


def read_csv(path, tail_tol=TAIL_TOL) -> Profile:
    """Read a profile written with header ``x,q`` on a uniform grid."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    if not rows or [c.strip() for c in rows[0]] != ["x", "q"]:
        raise BadParams(f"{path}: expected header 'x,q'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    x, q = data[:, 0], data[:, 1]
    grid = Grid(float(x[0]), float(x[-1]), len(x))
    if not np.allclose(x, grid.x, rtol=0, atol=1e-9 * max(1.0, grid.period)):
        raise BadParams(f"{path}: samples are not on a uniform grid; resample first")
    return from_samples(q, grid, tail_tol=tail_tol, params={"kind": "custom_samples"})


def write_csv(path, x, q, header_comment=None):
    """Write ``x,q`` rows; an optional leading ``# comment`` line carries provenance."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("x,q\n")
        for a, b in zip(np.asarray(x), np.asarray(q)):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
