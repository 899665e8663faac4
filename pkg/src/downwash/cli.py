"""Command-line front end: ``downwash {eval,grid,fit,simulate,presets}``.

Exit codes: 0 success, 1 solver or internal error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .control import Comparison, compare, config_from_dict, config_to_dict, run_passunder
from .errors import ConfigError, DomainError, FitError, NearFieldRequest, PlantError
from .model import (
    DEFAULT_JET,
    Cant,
    DroneSpec,
    Environment,
    FlowPoint,
    JetParameters,
    evaluate_point,
    far_field_speed,
    half_width_norm,
    hover_velocity,
)
from .pipeline import PipelineConfig, PipelineError, load_log, run_pipeline
from .presets import get_preset, load_jet_parameters, presets

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(subcommand: str, config: dict, inputs=()) -> dict:
    return {
        "tool": "downwash",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
    }


def _load_config_file(path):
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc


def _pick(args, cfg, flag, key=None):
    """Flag value if given, else config-file value."""
    v = getattr(args, flag, None)
    return v if v is not None else cfg.get(key or flag)


def resolve_drone(args, cfg) -> DroneSpec:
    name = _pick(args, cfg, "drone")
    base = None
    if name:
        try:
            base = get_preset(name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    mass = _pick(args, cfg, "mass")
    diameter = _pick(args, cfg, "prop_diameter")
    motor = _pick(args, cfg, "motor_distance")
    n_props = _pick(args, cfg, "n_props")
    if base is None:
        missing = [f for f, v in (("--mass", mass), ("--prop-diameter", diameter), ("--motor-distance", motor)) if v is None]
        if missing:
            raise UsageError(f"give --drone or all of {', '.join(missing)}")
        return DroneSpec("custom", float(mass), float(diameter) / 2, float(motor), int(n_props or 4))
    return DroneSpec(
        base.name if all(v is None for v in (mass, diameter, motor, n_props)) else f"{base.name} (modified)",
        float(mass) if mass is not None else base.mass,
        float(diameter) / 2 if diameter is not None else base.propeller_radius,
        float(motor) if motor is not None else base.motor_distance,
        int(n_props) if n_props is not None else base.n_propellers,
        base.cant,
    )


def resolve_env(args, cfg) -> Environment:
    kw = {}
    p, t = _pick(args, cfg, "pressure"), _pick(args, cfg, "temperature")
    if p is not None:
        kw["pressure"] = float(p)
    if t is not None:
        kw["temperature"] = float(t)
    return Environment(**kw)


def resolve_params(args, cfg) -> JetParameters:
    if getattr(args, "params", None):
        return load_jet_parameters(args.params)
    if "jet_parameters" in cfg:
        return JetParameters.from_dict(cfg["jet_parameters"])
    return DEFAULT_JET


def _resolved(drone, env, params) -> dict:
    return {
        "drone": drone.to_dict(),
        "environment": {"pressure": env.pressure, "temperature": env.temperature, "density": env.density},
        "jet_parameters": params.to_dict(),
    }


def cmd_eval(args, out) -> int:
    cfg = _load_config_file(args.config)
    drone, env, params = resolve_drone(args, cfg), resolve_env(args, cfg), resolve_params(args, cfg)
    s, r = _pick(args, cfg, "s"), _pick(args, cfg, "r")
    if s is None:
        raise UsageError("--s is required")
    r = 0.0 if r is None else r
    ev = evaluate_point(drone, env, params, FlowPoint(float(s), float(r)), args.clamp_near_field)
    result = {
        "mean_speed_mps": ev.speed,
        "u_hover_mps": ev.u_hover,
        "u_c_norm": ev.u_c_norm,
        "u_c_mps": ev.u_c,
        "r_half_norm": ev.r_half_norm,
        "r_half_m": ev.r_half_norm * drone.motor_distance,
        "xi": ev.xi,
        "s_norm": ev.s_norm,
        "r_norm": ev.r_norm,
        "clamped": ev.clamped,
        "qualitative_only": ev.qualitative_only,
    }
    if args.json:
        conf = _resolved(drone, env, params) | {"s_m": float(s), "r_m": float(r), "clamp_near_field": args.clamp_near_field}
        out.write(json.dumps(result | {"manifest": manifest("eval", conf)}, indent=2) + "\n")
    else:
        out.write(f"mean speed   {ev.speed:.4f} m/s\n")
        out.write(f"U_C / U_H    {ev.u_c_norm:.6g}\n")
        out.write(f"r_half / l   {ev.r_half_norm:.6g}\n")
        out.write(f"xi           {ev.xi:.6g}\n")
        out.write(f"s / l        {ev.s_norm:.6g}{' (clamped)' if ev.clamped else ''}\n")
        if ev.qualitative_only:
            out.write(f"note: {drone.cant.value}-canted propellers, qualitative only\n")
    return EXIT_OK


def grid_points(extent, resolution):
    s_min, s_max, r_min, r_max = extent
    if not resolution > 0:
        raise UsageError("--resolution must be positive")
    if s_max < s_min or r_max < r_min or r_min < 0:
        raise UsageError("--extent must be S_MIN S_MAX R_MIN R_MAX with S_MIN <= S_MAX, 0 <= R_MIN <= R_MAX")

    def ticks(lo, hi):
        n = int(np.floor((hi - lo) / resolution + 1e-9)) + 1
        return lo + resolution * np.arange(n)

    ss, rr = np.meshgrid(ticks(s_min, s_max), ticks(r_min, r_max), indexing="ij")
    return ss.ravel(), rr.ravel()


def cmd_grid(args, out) -> int:
    cfg = _load_config_file(args.config)
    drone, env, params = resolve_drone(args, cfg), resolve_env(args, cfg), resolve_params(args, cfg)
    extent = _pick(args, cfg, "extent")
    resolution = _pick(args, cfg, "resolution")
    if extent is None or resolution is None:
        raise UsageError("--extent and --resolution are required")
    s, r = grid_points([float(v) for v in extent], float(resolution))
    u = far_field_speed(drone, env, params, s, r, args.clamp_near_field)
    l = drone.motor_distance
    s_eff = np.maximum(s / l, 2.5) if args.clamp_near_field else s / l
    r_half = half_width_norm(s_eff, params) * l
    conf = _resolved(drone, env, params) | {
        "extent_m": list(map(float, extent)),
        "resolution_m": float(resolution),
        "clamp_near_field": args.clamp_near_field,
    }
    man = manifest("grid", conf)
    fmt = args.format or cfg.get("format", "csv")
    buf = io.StringIO()
    if fmt == "json":
        rows = [
            {"s_m": a, "r_m": b, "s_norm": a / l, "r_norm": b / l, "u_mps": c, "r_half_m": d}
            for a, b, c, d in zip(s.tolist(), r.tolist(), np.atleast_1d(u).tolist(), np.atleast_1d(r_half).tolist())
        ]
        buf.write(json.dumps({"manifest": man, "points": rows}, indent=2) + "\n")
    else:
        buf.write(f"# manifest: {json.dumps(man)}\n")
        buf.write("s_m,r_m,s_norm,r_norm,u_mps,r_half_m\n")
        for a, b, c, d in zip(s, r, np.atleast_1d(u), np.atleast_1d(r_half)):
            buf.write(f"{a:.12g},{b:.12g},{a / l:.12g},{b / l:.12g},{c:.12g},{d:.12g}\n")
    _emit(buf.getvalue(), args.out, out)
    return EXIT_OK


def _emit(text, dest, out):
    if dest:
        Path(dest).write_text(text)
    else:
        out.write(text)


def cmd_fit(args, out) -> int:
    cfg = _load_config_file(args.config)
    logs = args.log or cfg.get("logs") or []
    if not logs:
        raise UsageError("at least one --log is required")
    drone, env = resolve_drone(args, cfg), resolve_env(args, cfg)
    pcfg = PipelineConfig(
        resolution_norm=float(_pick(args, cfg, "resolution") or 0.33),
        ambient=_pick(args, cfg, "ambient"),
        pre_takeoff_window=float(_pick(args, cfg, "pre_takeoff_window") or 0.0),
        weighting=_pick(args, cfg, "weighting") or "rms",
    )
    records, rejected = [], 0
    for path in logs:
        try:
            parsed = load_log(path)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
        except ValueError as exc:
            raise PipelineError(f"load_log({path})", exc) from exc
        records.extend(parsed.records)
        rejected += len(parsed.rejected)
        for line, why in parsed.rejected[:20]:
            sys.stderr.write(f"{path}:{line}: rejected ({why})\n")
    result = run_pipeline(records, drone, env, pcfg)
    conf = {"drone": drone.to_dict(), "environment": {"pressure": env.pressure, "temperature": env.temperature},
            "pipeline": vars(pcfg), "logs": [str(p) for p in logs]}
    text = result.to_json(rejected_rows=rejected, manifest=manifest("fit", conf, logs))
    _emit(text + "\n", args.out, out)
    for line in result.diagnostics:
        sys.stderr.write(f"note: {line}\n")
    if args.out:
        p = result.jet_parameters
        out.write(f"bd = {p.bd:.6g}, S = {p.spreading_rate:.6g}, s0/l = {p.s0_norm:.6g} -> {args.out}\n")
    return EXIT_OK


def _sim_config(path_or_name):
    p = Path(path_or_name)
    if p.exists():
        return json.loads(p.read_text()), [p]
    bundled = resources.files("downwash").joinpath(f"data/sim/{path_or_name}.json")
    if bundled.is_file():
        return json.loads(bundled.read_text()), []
    raise UsageError(f"no such config file or bundled scenario: {path_or_name}")


def summarize(comp: Comparison) -> dict:
    out = {"compensated": comp.compensated.metrics()}
    if comp.uncompensated is not None:
        out["uncompensated"] = comp.uncompensated.metrics()
        out["improvement_ratio"] = comp.improvement_ratio
    return out


def cmd_simulate(args, out) -> int:
    if not args.config:
        raise UsageError("--config is required")
    data, inputs = _sim_config(args.config)
    cfg = config_from_dict(data)
    comp = compare(cfg) if args.compare else Comparison(run_passunder(replace(cfg, compensation_enabled=True)))
    summary = summarize(comp)
    man = manifest("simulate", config_to_dict(cfg) | {"compare": args.compare}, inputs)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        head = [f"manifest: {json.dumps(man)}"]
        comp.compensated.write_csv(d / "result_compensated.csv", head)
        if comp.uncompensated is not None:
            comp.uncompensated.write_csv(d / "result_uncompensated.csv", head)
        (d / "metrics.json").write_text(json.dumps(summary | {"manifest": man}, indent=2) + "\n")
    out.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_presets(args, out) -> int:
    rows = []
    for d in presets().values():
        rows.append(d.to_dict() | {"u_hover_mps": hover_velocity(d), "qualitative_only": d.cant is not Cant.UNCANTED})
    if args.json:
        out.write(json.dumps({"presets": rows, "manifest": manifest("presets", {})}, indent=2) + "\n")
        return EXIT_OK
    out.write(f"{'name':<12} {'mass kg':>8} {'prop d m':>9} {'l m':>7} {'cant':>9} {'U_H m/s':>8}\n")
    for r in rows:
        flag = "  qualitative-only" if r["qualitative_only"] else ""
        out.write(
            f"{r['name']:<12} {r['mass_kg']:>8.3f} {r['propeller_diameter_m']:>9.4f} {r['motor_distance_m']:>7.3f} "
            f"{r['cant']:>9} {r['u_hover_mps']:>8.2f}{flag}\n"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    vehicle = argparse.ArgumentParser(add_help=False)
    vehicle.add_argument("--drone", help="preset name, see `downwash presets`")
    vehicle.add_argument("--mass", type=float, help="kg")
    vehicle.add_argument("--prop-diameter", type=float, help="m")
    vehicle.add_argument("--motor-distance", type=float, help="diagonal motor-to-motor distance, m")
    vehicle.add_argument("--n-props", type=int)
    vehicle.add_argument("--pressure", type=float, help="Pa (default 101325)")
    vehicle.add_argument("--temperature", type=float, help="K (default 293.15)")
    vehicle.add_argument("--params", help="JSON file with bd, spreading_rate, s0_norm")
    vehicle.add_argument("--config", help="JSON config file; flags take precedence")

    parser = argparse.ArgumentParser(prog="downwash", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[vehicle], help="mean downwash speed at one point")
    p.add_argument("--s", type=float, help="distance below the rotor plane, m")
    p.add_argument("--r", type=float, help="radial distance from the axis, m")
    p.add_argument("--json", action="store_true")
    p.add_argument("--clamp-near-field", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", parents=[vehicle], help="downwash speed on an (s, r) grid")
    p.add_argument("--extent", type=float, nargs=4, metavar=("S_MIN", "S_MAX", "R_MIN", "R_MAX"), help="m")
    p.add_argument("--resolution", type=float, help="grid spacing, m")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.add_argument("--clamp-near-field", action="store_true")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("fit", parents=[vehicle], help="fit jet parameters to flight logs")
    p.add_argument("--log", nargs="+", action="extend", metavar="PATH")
    p.add_argument("--out")
    p.add_argument("--resolution", type=float, help="grid cell size in motor distances (default 0.33)")
    p.add_argument("--ambient", type=float, help="ambient flow to subtract, m/s")
    p.add_argument("--pre-takeoff-window", type=float, help="s of log used to estimate the ambient flow")
    p.add_argument("--weighting", choices=("rms", "uniform"))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="pass-under simulation")
    p.add_argument("--config", help="SimConfig JSON file or bundled scenario name (passunder_1m, passunder_2m)")
    p.add_argument("--compare", action="store_true", help="also run without compensation")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("presets", help="list the reference vehicles")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except NearFieldRequest as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (UsageError, ConfigError, DomainError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except PipelineError as exc:
        sys.stderr.write(f"error in stage {exc}\n")
        return EXIT_INTERNAL
    except (FitError, PlantError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INTERNAL
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
