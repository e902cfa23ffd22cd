"""Command line front end: ``qbwg <command> [options]``.

Commands::

    spectrum   bound states at one parameter point
    sweep      bound-state spectrum along --sweep AXIS:LO:HI:N
    dynamics   non-Markovian trajectory (or one per sweep point)
    steady     long-time energy/ergotropy extrema from the residues
    physical   dimensionless parameters from SI waveguide geometry
    figure     CSV bundle for a figure preset (fig2, fig3, fig4)

Settings come from defaults, then an optional JSON ``--config`` file, then
flags; later sources win. Every run writes ``summary.json`` (with the resolved
config) and CSV tables into ``--out``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 sweep finished with some failed points.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field, asdict
import json
import logging
from pathlib import Path
import sys
import time

import numpy as np
from scipy import constants

from . import __version__
from .dynamics import SCHEMES, SolverConfig, solve_volterra, long_time_amplitude
from .errors import NumericalError
from .figures import RECIPES, SPECTRUM_COLUMNS, reproduce_figure
from .io import trajectory_columns, write_csv, write_json, write_rows
from .kernels import kernel_grid, markov_rates
from .model import PhysicalWaveguide, SystemParams, gamma11_from_physical
from .observables import series_extrema, series_from_trajectory, steady_extrema
from .parallel import ordered_map
from .spectrum import find_bound_states, find_transitions, spectrum_sweep, sweep_values

log = logging.getLogger("qbwg")

COMMANDS = ("spectrum", "dynamics", "sweep", "steady", "physical", "figure")
AXES = ("omega0", "delta_z", "gamma11")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4

DEFAULTS = {
    "omega0": 1.0,
    "gamma11": 0.5,
    "dz": 0.1,
    "dt": 0.01,
    "t_end": 400.0,
    "scheme": "trapezoid-product",
    "sweep": None,
    "out": "qbwg_out",
    "workers": 1,
    "figure": None,
    # geometry for `physical` (SI units)
    "a": 0.45e-6,
    "b": 0.45e-6,
    "lambda0": 637e-9,
    "dipole": 1e-29,
    "distance": None,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    lo: float
    hi: float
    n_points: int

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"--sweep expects AXIS:LO:HI:N, got {text!r}")
        axis = {"dz": "delta_z"}.get(parts[0], parts[0])
        if axis not in AXES:
            raise ConfigError(f"sweep axis must be one of {AXES} (or dz), got {parts[0]!r}")
        try:
            lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"bad sweep range {text!r}: {exc}") from None
        if n < 2 or not hi > lo:
            raise ConfigError("sweep needs HI > LO and N >= 2")
        return cls(axis, lo, hi, n)

    def values(self) -> np.ndarray:
        return sweep_values(self.lo, self.hi, self.n_points)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: SystemParams
    solver: SolverConfig
    sweep: SweepSpec | None = None
    out: Path = Path(DEFAULTS["out"])
    workers: int = 1
    figure: str | None = None
    geometry: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params.as_dict(),
            "solver": self.solver.as_dict(),
            "sweep": asdict(self.sweep) if self.sweep else None,
            "out": str(self.out),
            "workers": self.workers,
            "figure": self.figure,
            "geometry": self.geometry or None,
            "version": __version__,
        }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qbwg",
        description="Remote charging of a two-level battery through a rectangular waveguide.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("figure", nargs="?", help="preset name for the figure command")
    ap.add_argument("--config", type=Path, help="JSON file with settings (flags override)")
    ap.add_argument("--omega0", type=float, help="emitter frequency / omega_11")
    ap.add_argument("--gamma11", type=float, help="coupling Gamma_11 / omega_11")
    ap.add_argument("--dz", type=float, help="charger-battery distance / lambda_11")
    ap.add_argument("--dt", type=float, help="time step (1/omega_11)")
    ap.add_argument("--t-end", dest="t_end", type=float, help="time horizon (1/omega_11)")
    ap.add_argument("--scheme", choices=SCHEMES, help="Volterra discretisation")
    ap.add_argument("--sweep", help="AXIS:LO:HI:N with AXIS in omega0, delta_z (dz), gamma11")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--workers", type=int, help="worker processes for sweeps")
    ap.add_argument("--a", type=float, help="waveguide width a (m), physical command")
    ap.add_argument("--b", type=float, help="waveguide height b (m), physical command")
    ap.add_argument("--lambda0", type=float, help="emitter wavelength (m), physical command")
    ap.add_argument("--dipole", type=float, help="dipole moment d_z (C m), physical command")
    ap.add_argument("--distance", type=float,
                    help="charger-battery distance (m), physical command")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the optional JSON file and explicit flags."""
    merged = dict(DEFAULTS)
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        if "delta_z" in data:
            data["dz"] = data.pop("delta_z")
        unknown = set(data) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data.pop("command", None)
        merged.update(data)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val

    try:
        params = SystemParams(float(merged["omega0"]), float(merged["gamma11"]),
                              float(merged["dz"]))
        solver = SolverConfig(dt=float(merged["dt"]), t_end=float(merged["t_end"]),
                              scheme=merged["scheme"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    sweep = SweepSpec.parse(merged["sweep"]) if merged["sweep"] else None
    workers = int(merged["workers"])
    if workers < 1:
        raise ConfigError("--workers must be >= 1")

    cmd = args.command
    if cmd == "sweep" and sweep is None:
        raise ConfigError("the sweep command needs --sweep AXIS:LO:HI:N")
    if cmd == "figure":
        if merged["figure"] not in RECIPES:
            raise ConfigError(f"figure preset must be one of {sorted(RECIPES)}")
    elif args.figure is not None:
        raise ConfigError(f"unexpected positional argument {args.figure!r}")
    if cmd == "dynamics":
        pts = [params] if sweep is None else [_point(params, sweep, v) for v in sweep.values()]
        for p in pts:
            try:
                solver.check_resolution(p)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    geometry = {}
    if cmd == "physical":
        geometry = {k: merged[k] for k in ("a", "b", "lambda0", "dipole", "distance")}
    return RunConfig(command=cmd, params=params, solver=solver, sweep=sweep,
                     out=Path(merged["out"]), workers=workers, figure=merged["figure"],
                     geometry=geometry)


def _point(params, sweep, value):
    try:
        return params.replace(**{sweep.axis: float(value)})
    except ValueError as exc:
        raise ConfigError(f"sweep point {sweep.axis}={value}: {exc}") from None


def _states_json(spec):
    return {
        "M": spec.count,
        "degenerate": spec.degenerate,
        "states": [{"branch": s.label, "energy": s.energy, "residue": s.residue}
                   for s in spec.states],
    }


def _cmd_spectrum(cfg):
    spec = find_bound_states(cfg.params)
    rec = spec.row()
    write_rows(cfg.out / "spectrum.csv", ["omega0", "gamma11", "delta_z"] + SPECTRUM_COLUMNS[1:],
               [[cfg.params.omega0, cfg.params.gamma11, cfg.params.delta_z]
                + [rec[c] for c in SPECTRUM_COLUMNS[1:]]])
    return _states_json(spec), []


def _cmd_sweep(cfg):
    s = cfg.sweep
    pts = spectrum_sweep(cfg.params, s.axis, s.lo, s.hi, s.n_points, workers=cfg.workers)
    rows, errors = [], []
    for pt in pts:
        rec = pt.row("axis_value")
        rows.append([rec[c] for c in SPECTRUM_COLUMNS])
        if pt.error:
            errors.append({"axis_value": pt.axis_value, "error": pt.error})
    write_rows(cfg.out / "sweep.csv", SPECTRUM_COLUMNS, rows)
    counts = {format(pt.axis_value, "g"): pt.result.count for pt in pts if pt.result}
    trans = [tr.as_dict() for tr in find_transitions(pts)]
    return {"axis": s.axis, "points": len(pts), "M": counts, "transitions": trans}, errors


def _trajectory_point(args):
    params, solver, grid = args
    try:
        traj = solve_volterra(params, solver, grid)
    except NumericalError as exc:
        return None, f"NumericalError: {exc}"
    return traj, None


def _cmd_dynamics(cfg):
    s = cfg.sweep
    pts = [cfg.params] if s is None else [_point(cfg.params, s, v) for v in s.values()]
    grids = {}
    jobs = []
    for p in pts:
        key = (p.gamma11, p.delta_z)
        if key not in grids:
            grids[key] = kernel_grid(p, cfg.solver.dt, cfg.solver.n_steps)
        jobs.append((p, cfg.solver, grids[key]))
    results = ordered_map(_trajectory_point, jobs, cfg.workers)
    runs, errors = [], []
    t_end = cfg.solver.n_steps * cfg.solver.dt
    window = (0.75 * t_end, t_end)
    for i, (p, (traj, err)) in enumerate(zip(pts, results)):
        if traj is None:
            if s is None:
                raise NumericalError(err)
            errors.append({"index": i, "params": p.as_dict(), "error": err})
            continue
        series = series_from_trajectory(traj)
        name = "trajectory.csv" if s is None else f"trajectory_{i:03d}.csv"
        write_csv(cfg.out / name, trajectory_columns(traj, series))
        spec = find_bound_states(p)
        _, lt2 = long_time_amplitude(spec, p, traj.times[-1])
        run = {
            "file": name,
            "params": p.as_dict(),
            "final_energy": float(series.energy[-1]),
            "final_ergotropy": float(series.ergotropy[-1]),
            "max_norm": float(np.max(traj.norm)),
            "late_window": list(window),
            "late_extrema": series_extrema(series, window),
            "spectrum": _states_json(spec),
            "long_time_energy_at_t_end": p.omega0 * float(abs(lt2) ** 2),
        }
        if p.omega0 != 1.0:
            r = markov_rates(p)
            run["markov_rates"] = {"upsilon0": [r.upsilon0.real, r.upsilon0.imag],
                                   "upsilon1": [r.upsilon1.real, r.upsilon1.imag]}
        runs.append(run)
    return {"runs": runs}, errors


def _steady_point(params):
    try:
        return find_bound_states(params), None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _cmd_steady(cfg):
    s = cfg.sweep
    pts = [cfg.params] if s is None else [_point(cfg.params, s, v) for v in s.values()]
    results = ordered_map(_steady_point, pts, cfg.workers)
    header = ["omega0", "gamma11", "delta_z", "M", "degenerate",
              "max_energy", "min_energy", "max_ergotropy"]
    rows, errors, best = [], [], None
    for p, (spec, err) in zip(pts, results):
        if spec is None:
            errors.append({"params": p.as_dict(), "error": err})
            rows.append([p.omega0, p.gamma11, p.delta_z] + [None] * 5)
            continue
        ext = steady_extrema(spec, p.omega0)
        rows.append([p.omega0, p.gamma11, p.delta_z, spec.count, int(spec.degenerate),
                     ext["max_energy"], ext["min_energy"], ext["max_ergotropy"]])
        if best is None or ext["max_ergotropy"] > best["max_ergotropy"]:
            best = dict(ext, **p.as_dict())
    write_rows(cfg.out / "steady.csv", header, rows)
    return {"points": len(pts), "best_ergotropy": best}, errors


def _cmd_physical(cfg):
    g = cfg.geometry
    try:
        geom = PhysicalWaveguide.centered(g["a"], g["b"], g["dipole"], g["lambda0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = {
        "omega11_rad_s": geom.omega11,
        "omega0_rad_s": geom.omega0,
        "omega0_ratio": geom.omega0_ratio(),
        "gamma11": gamma11_from_physical(geom),
        "lambda11_m": 2 * np.pi * constants.c / geom.omega11,
    }
    if g.get("distance") is not None:
        res["delta_z"] = geom.to_params(g["distance"]).delta_z
    write_rows(cfg.out / "physical.csv", list(res), [list(res.values())])
    return res, []


def _cmd_figure(cfg):
    res = reproduce_figure(cfg.figure, cfg.out, cfg.solver, workers=cfg.workers)
    return {"files": res["files"], "summary": res["summary"]}, res["errors"]


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "sweep": _cmd_sweep,
    "dynamics": _cmd_dynamics,
    "steady": _cmd_steady,
    "physical": _cmd_physical,
    "figure": _cmd_figure,
}


def run(cfg: RunConfig) -> int:
    """Execute one resolved configuration and write ``summary.json``."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    summary = {"config": cfg.as_dict()}
    try:
        results, errors = _HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        summary.update(status="config_error", error=str(exc))
        write_json(cfg.out / "summary.json", summary)
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (NumericalError, RuntimeError, ArithmeticError) as exc:
        summary.update(status="numerical_failure", error=f"{type(exc).__name__}: {exc}")
        summary["timing_s"] = time.perf_counter() - start
        write_json(cfg.out / "summary.json", summary)
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    summary["results"] = results
    summary["errors"] = errors
    summary["status"] = "partial" if errors else "ok"
    summary["timing_s"] = time.perf_counter() - start
    write_json(cfg.out / "summary.json", summary)
    return EXIT_PARTIAL if errors else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"qbwg: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
