"""Command-line driver: eb {scatter, asymptote, evolve, compare} --config run.toml."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from .asymptotics import AsymptoticModel, AsymptoticOptions, write_slice_csv
from .compare import compare_snapshots, write_overlay_csv
from .errors import AssumptionViolated, BadParams, EBError, NumericalFailure, RegionViolation, ValidationError
from .pdesolver import SteppingOptions, evolve, max_conservation_drift
from .phase import check_region
from .profile import Grid, build_profile, charges, read_csv, write_csv
from .scattering import ScatteringData, reflection_sweep, spectral_grid, symmetric_lambdas

log = logging.getLogger("ebeam")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _tag(value) -> str:
    return f"{float(value):g}".replace(".", "p")


def _initial_profile(cfg, grid: Grid):
    pc = cfg.profile
    if pc.kind == "custom_samples":
        if not pc.samples:
            raise BadParams("kind = custom_samples needs profile.samples (a CSV path)")
        p = read_csv(cfg.resolve(pc.samples), tail_tol=pc.tail_tol)
        if (p.grid.x_min, p.grid.x_max, p.grid.n) != (grid.x_min, grid.x_max, grid.n):
            raise BadParams("custom samples must lie on the configured grid")
        return p
    return build_profile(pc.kind, {"amp": pc.amp, "width": pc.width}, grid, tail_tol=pc.tail_tol)


def _scatter_grid(cfg):
    pc = cfg.profile
    return Grid(pc.x_min, pc.x_max, pc.n)


def _pde_grid(cfg):
    pc, pd = cfg.profile, cfg.pde
    return Grid(pd.x_min if pd.x_min is not None else pc.x_min,
                pd.x_max if pd.x_max is not None else pc.x_max,
                pd.n if pd.n is not None else pc.n)


def _asym_options(cfg, c_total=0.0):
    a = cfg.asymptotics
    return AsymptoticOptions(coordinate_mode=a.coordinate_mode, n_sim=a.n_sim,
                             c_total=c_total, variant=a.variant)


def compute_scattering(cfg, out: Path | None = None, reuse=True):
    """Sweep (or reuse a scattering.json written for the same config hash)."""
    h = cfg.config_hash()
    path = out / "scattering.json" if out else None
    if reuse and path is not None and path.exists():
        try:
            sd = ScatteringData.load(path)
            if sd.meta.get("config_hash") == h:
                log.info("reusing %s", path)
                return sd
        except (ValueError, KeyError):
            pass
    sc = cfg.scattering
    p = _initial_profile(cfg, _scatter_grid(cfg))
    lams = symmetric_lambdas(spectral_grid(sc.lambda_max, sc.n_lambda, sc.spacing, sc.knee))
    sd = reflection_sweep(p, lams, a_floor=sc.a_floor, rtol=sc.ode_tol, atol=sc.ode_tol,
                          meta={"config_hash": h, "unitarity_tol": sc.unitarity_tol})
    worst = float(np.max(sd.unitarity_defect()))
    if worst > sc.unitarity_tol:
        raise NumericalFailure(f"unitarity defect {worst:.2e} exceeds unitarity_tol {sc.unitarity_tol:.1e}")
    if path is not None:
        sd.save(path)
    return sd


def cmd_scatter(cfg, out: Path, args) -> int:
    sd = compute_scattering(cfg, out, reuse=False)
    print(f"scattering.json written to {out}")
    print(f"worst unitarity defect ||a|^2+|b|^2-1| = {np.max(sd.unitarity_defect()):.3e}")
    print(f"min |a| = {sd.min_abs_a:.6f}")
    return EXIT_OK


def cmd_asymptote(cfg, out: Path, args) -> int:
    t = float(args.t)
    if not t > 0:
        raise BadParams("--t must be positive")
    sd = compute_scattering(cfg, out)
    c_total = charges(_initial_profile(cfg, _scatter_grid(cfg))).c_total
    opts = _asym_options(cfg, c_total)
    lo, hi = cfg.asymptotics.window
    xs = np.linspace(lo * t, hi * t, cfg.asymptotics.slice_points)
    model = AsymptoticModel(sd, opts)
    sl = model.slice(xs, t)
    h = cfg.config_hash()
    tag = _tag(t)
    write_slice_csv(out / f"asymptote_t{tag}.csv", sl, t)
    points = []
    for x in xs:
        try:
            points.append({"x": float(x), **model.ingredients(float(x), t).to_json()})
        except EBError as exc:
            points.append({"x": float(x), "degenerate": str(exc)})
    _write_json(out / f"asymptote_t{tag}.json", {
        "config_hash": h, "t": t, "window": [lo, hi], "variant": opts.variant,
        "coordinate_mode": opts.coordinate_mode, "c_total": c_total, "points": points})
    print(f"asymptotic slice at t = {t:g} written to {out}")
    return EXIT_OK


def _run_pde(cfg, t_end, snapshot_times):
    pd = cfg.pde
    grid = _pde_grid(cfg)
    p0 = _initial_profile(cfg, grid)
    opts = SteppingOptions(ode_tol=pd.ode_tol, wake_tol=pd.wake_tol,
                           snapshot_times=tuple(snapshot_times), chunk=pd.chunk,
                           edge_fraction=pd.edge_fraction)
    t0 = time.perf_counter()
    state = evolve(p0, t_end, opts)
    return state, time.perf_counter() - t0


def _pde_meta(cfg, state, elapsed, timings):
    grid = state.profile.grid
    meta = {
        "config_hash": cfg.config_hash(),
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n},
        "ode_tol": cfg.pde.ode_tol, "wake_tol": cfg.pde.wake_tol,
        "t_end": state.t, "steps_taken": state.steps_taken,
        "c_total_initial": state.c_total_initial,
        "max_relative_charge_drift": max_conservation_drift(state),
        "relative_charge_drift": [[t, abs(c - state.c_total_initial) / abs(state.c_total_initial)]
                                  for t, c in state.charge_history] if state.c_total_initial else [],
        "max_boundary_wake": state.max_wake,
        "snapshot_times": sorted(state.snapshots),
    }
    if timings:
        meta["wall_seconds"] = elapsed
    return meta


def cmd_evolve(cfg, out: Path, args) -> int:
    t_end = float(args.t_end)
    snaps = sorted({s for s in cfg.pde.snapshot_times if s <= t_end} | {t_end})
    state, elapsed = _run_pde(cfg, t_end, snaps)
    h = cfg.config_hash()
    x = state.profile.x
    for t, q in sorted(state.snapshots.items()):
        write_csv(out / f"snapshot_t{_tag(t)}.csv", x, q, header_comment=f"config_sha256={h} t={t!r}")
    _write_json(out / "evolve.json", _pde_meta(cfg, state, elapsed, args.timings))
    print(f"evolved to t = {t_end:g} in {state.steps_taken} steps; "
          f"max relative charge drift {max_conservation_drift(state):.2e}")
    return EXIT_OK


def cmd_compare(cfg, out: Path, args) -> int:
    times = sorted(cfg.pde.snapshot_times)
    if not times:
        raise BadParams("pde.snapshot_times is empty; nothing to compare")
    for ratio in cfg.asymptotics.window:
        check_region(ratio, cfg.asymptotics.n_sim)
    sd = compute_scattering(cfg, out)
    state, elapsed = _run_pde(cfg, times[-1], times)
    opts = _asym_options(cfg, state.c_total_initial)
    report, overlays = compare_snapshots(state.profile.x, state.snapshots, sd,
                                         tuple(cfg.asymptotics.window), opts)
    h = cfg.config_hash()
    report.meta = _pde_meta(cfg, state, elapsed, args.timings)
    _write_json(out / "report.json", report.to_json())
    if "csv" in cfg.output.formats:
        for t, ov in overlays.items():
            write_overlay_csv(out / f"overlay_t{_tag(t)}.csv", ov, t, header_comment=f"config_sha256={h}")
    print(f"report.json written to {out}")
    for r in report.residuals:
        print(f"  t = {r.t:6g}  max residual {r.max_residual:.3e}  signal {r.signal_amplitude:.3e}  "
              f"zero-crossing offset {r.zero_crossing_offset:.3f} wavelengths")
    print(f"signal exponent {report.signal_exponent:.3f}, residual exponent {report.residual_exponent:.3f}")
    return EXIT_OK


COMMANDS = {"scatter": cmd_scatter, "asymptote": cmd_asymptote, "evolve": cmd_evolve, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eb", description="Scattering data, long-time asymptotics "
                                 "and direct simulation for q_t = (q_xx (1+q_x^2)^(-3/2))_x.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("scatter", "tabulate a, b, r over the spectral grid"),
                           ("asymptote", "evaluate the asymptotic formula on a t-slice"),
                           ("evolve", "integrate the PDE directly"),
                           ("compare", "compare the PDE solution with the asymptotic formula")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", help="output directory (overrides [output] directory)")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "asymptote":
            sp.add_argument("--t", type=float, required=True, help="time of the slice")
        if name == "evolve":
            sp.add_argument("--t-end", type=float, required=True, help="final time")
        if name in ("evolve", "compare"):
            sp.add_argument("--timings", action="store_true",
                            help="record wall-clock time in the metadata (breaks byte-identical reruns)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not Path(args.config).is_file():
        ap.error(f"config file not found: {args.config}")
    try:
        cfg = cfgmod.load(args.config)
        out = Path(args.out) if args.out else cfg.resolve(cfg.output.directory)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args)
    except AssumptionViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: the profile may carry discrete spectrum; reduce profile.amp", file=sys.stderr)
        return EXIT_VALIDATION
    except RegionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.window:
            print(f"admissible x/t window: [{exc.window[0]:g}, {exc.window[1]:g}]", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
