"""Run configuration read from a TOML file with sections
[profile], [scattering], [asymptotics], [pde] and [output]."""
from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import BadParams


@dataclass(frozen=True)
class ProfileSection:
    kind: str = "gaussian"
    amp: float = 0.1
    width: float = 2.0
    x_min: float = -40.0
    x_max: float = 40.0
    n: int = 2048
    tail_tol: float = 1e-10
    samples: str = ""  # CSV path for kind = "custom_samples"


@dataclass(frozen=True)
class ScatteringSection:
    lambda_max: float = 16.0
    n_lambda: int = 400
    spacing: float = 0.02
    knee: float = 4.0
    unitarity_tol: float = 1e-6
    a_floor: float = 0.05
    ode_tol: float = 1e-10


@dataclass(frozen=True)
class AsymptoticsSection:
    coordinate_mode: str = "x_based"
    variant: str = "corrected"
    n_sim: float = 25.0
    window: tuple = (2.0, 4.0)
    slice_points: int = 401


@dataclass(frozen=True)
class PdeSection:
    ode_tol: float = 1e-10
    wake_tol: float = 1e-8
    snapshot_times: tuple = (20.0, 40.0, 80.0, 160.0)
    chunk: float = 10.0
    edge_fraction: float = 0.0078125  # boundary strips watched for the wake (1/128 of the span)
    # evolution grid; unset values fall back to the [profile] grid
    x_min: float | None = None
    x_max: float | None = None
    n: int | None = None


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: tuple = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    profile: ProfileSection = field(default_factory=ProfileSection)
    scattering: ScatteringSection = field(default_factory=ScatteringSection)
    asymptotics: AsymptoticsSection = field(default_factory=AsymptoticsSection)
    pde: PdeSection = field(default_factory=PdeSection)
    output: OutputSection = field(default_factory=OutputSection)
    base_dir: str = "."  # directory of the config file, for relative paths

    def __post_init__(self):
        tols = {
            "profile.tail_tol": self.profile.tail_tol,
            "scattering.unitarity_tol": self.scattering.unitarity_tol,
            "scattering.a_floor": self.scattering.a_floor,
            "scattering.ode_tol": self.scattering.ode_tol,
            "pde.ode_tol": self.pde.ode_tol,
            "pde.wake_tol": self.pde.wake_tol,
        }
        for name, v in tols.items():
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise BadParams(f"{name} must be a positive number, got {v!r}")
        if not self.scattering.lambda_max > 1:
            raise BadParams("scattering.lambda_max must exceed 1")
        st = list(self.pde.snapshot_times)
        if any(b <= a for a, b in zip(st, st[1:])) or any(s <= 0 for s in st):
            raise BadParams("pde.snapshot_times must be positive and strictly increasing")
        w = self.asymptotics.window
        if len(w) != 2 or not w[0] < w[1]:
            raise BadParams("asymptotics.window must be [lo, hi] with lo < hi")
        if self.asymptotics.coordinate_mode not in ("x_based", "y_based"):
            raise BadParams("asymptotics.coordinate_mode must be x_based or y_based")
        if self.asymptotics.variant not in ("corrected", "uncorrected"):
            raise BadParams("asymptotics.variant must be corrected or uncorrected")
        if self.asymptotics.slice_points < 2:
            raise BadParams("asymptotics.slice_points must be at least 2")

    def hashable(self) -> dict:
        """Everything that affects results (the output section does not)."""
        d = asdict(self)
        d.pop("output")
        d.pop("base_dir")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.hashable(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


_SECTIONS = {
    "profile": ProfileSection,
    "scattering": ScatteringSection,
    "asymptotics": AsymptoticsSection,
    "pde": PdeSection,
    "output": OutputSection,
}


def _section(cls, raw, name):
    if not isinstance(raw, dict):
        raise BadParams(f"[{name}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise BadParams(f"unknown keys in [{name}]: {sorted(unknown)}")
    vals = {}
    for k, v in raw.items():
        default = known[k].default
        if isinstance(v, list):
            v = tuple(v)
        if isinstance(default, float) and isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        if default is not None and type(default) is not type(v):
            raise BadParams(f"[{name}] {k} should be {type(default).__name__}, got {v!r}")
        vals[k] = v
    return cls(**vals)


def from_dict(raw: dict, base_dir=".") -> RunConfig:
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise BadParams(f"unknown config sections: {sorted(unknown)}")
    parts = {name: _section(cls, raw.get(name, {}), name) for name, cls in _SECTIONS.items()}
    return RunConfig(**parts, base_dir=str(base_dir))


def load(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise BadParams(f"{path}: {exc}") from exc
    return from_dict(raw, base_dir=path.parent)
