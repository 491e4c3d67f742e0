"""Command-line front end.

Subcommands ``calibrate``, ``torque-map``, ``grasp-sweep``, ``compare-rigid``
and ``objects`` each write their artifacts (CSV, JSON, SVG) into ``--out``.
Every artifact carries the SHA-256 of the resolved configuration and the
seed, and identical (config, seed) pairs give byte-identical CSV and JSON.

Exit codes: 0 success, 2 config or input error, 3 infeasible request,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml

from hybridgrip import __version__
from hybridgrip.engine import DEFAULT_SETTINGS, EngineSettings, RigidObjectSpec
from hybridgrip.errors import (
    ConfigError,
    DomainError,
    EngineError,
    InfeasibleError,
    IngestionError,
)
from hybridgrip.geometry import FingertipGeometry
from hybridgrip.joint import (
    DEFAULT_MODEL,
    PROTOCOL_ALPHAS,
    PROTOCOL_PRESSURES,
    JointStiffnessModel,
    fit_model,
    ingest_calibration_log,
    read_calibration_log,
    ring_torque,
)
from hybridgrip.montecarlo import (
    COMPARE_CLOSURES,
    COMPARE_PRESSURE,
    DEFAULT_OBJECTS,
    OBJECT_PRESSURES,
    COMPARE_CONDITIONS,
    SWEEP_ALPHAS,
    SWEEP_CLOSURE,
    SWEEP_PRESS_FORCE,
    SWEEP_PRESSURES,
    SWEEP_SEPARATION,
    CompareCondition,
    SimContext,
    StochasticParams,
    SuccessRateReport,
    compare_key,
    config_hash,
    object_key,
    objects_campaign,
    rigid_vs_hybrid_campaign,
    sweep_key,
    sweep_paper_campaign,
)
from hybridgrip.sheet import SheetSpec
from hybridgrip.svgplot import line_chart

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 2, 3, 4
DEFAULT_SEED = 42
DEFAULT_TRIALS = 1000


# ---------------------------------------------------------------------------
# configuration

def _block(data: Any, name: str, allowed: Sequence[str]) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected a mapping")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{name}: unknown keys {unknown} (allowed: {sorted(allowed)})")
    return data


def _num(block: dict, key: str, default: float, where: str) -> float:
    v = block.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _nums(block: dict, key: str, default: Sequence[float], where: str) -> tuple[float, ...]:
    v = block.get(key, default)
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{where}.{key}: expected a nonempty list")
    return tuple(_num({key: x}, key, 0.0, where) for x in v)


def _pair(block: dict, key: str, default: tuple[float, float], where: str) -> tuple[float, float]:
    v = _nums(block, key, default, where)
    if len(v) != 2:
        raise ConfigError(f"{where}.{key}: expected [lo, hi]")
    return v[0], v[1]


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    geom: FingertipGeometry = FingertipGeometry()
    joint_model: JointStiffnessModel = DEFAULT_MODEL
    calibration_sha256: Optional[str] = None
    sheet: SheetSpec = SheetSpec()
    stoch: StochasticParams = StochasticParams()
    settings: EngineSettings = DEFAULT_SETTINGS
    n_trials: int = DEFAULT_TRIALS
    workers: int = 1
    output_dir: Optional[Path] = None
    sweep_alphas: tuple[float, ...] = SWEEP_ALPHAS
    sweep_pressures: tuple[float, ...] = SWEEP_PRESSURES
    sweep_separation: float = SWEEP_SEPARATION
    sweep_closure: float = SWEEP_CLOSURE
    sweep_press_force: float = SWEEP_PRESS_FORCE
    conditions: tuple[CompareCondition, ...] = COMPARE_CONDITIONS
    compare_closures: tuple[float, ...] = COMPARE_CLOSURES
    compare_pressure: float = COMPARE_PRESSURE
    objects: tuple[RigidObjectSpec, ...] = DEFAULT_OBJECTS
    object_pressures: tuple[float, ...] = OBJECT_PRESSURES

    @property
    def seed(self) -> int:
        return self.stoch.seed

    @property
    def context(self) -> SimContext:
        return SimContext(self.geom, self.joint_model, replace(self.settings, record_trace=False), self.workers)

    def to_dict(self) -> dict:
        """Canonical unit-keyed form; this is what the config hash covers."""
        g, s, st, es = self.geom, self.sheet, self.stoch, self.settings
        joint = self.joint_model.to_dict()
        if self.calibration_sha256:
            joint["calibration_sha256"] = self.calibration_sha256
        return {
            "seed": st.seed,
            "n_trials": self.n_trials,
            "geometry": {
                "r_c_mm": g.r_c, "d1_mm": g.d1, "beta_deg": g.beta,
                "alpha_max_deg": g.alpha_max, "a1_mm": g.a1,
            },
            "joint": joint,
            "sheet": {
                "elastic_modulus_pa": s.elastic_modulus, "thickness_mm": s.thickness,
                "width_mm": s.width, "length_mm": s.length,
                "areal_density_kg_per_m2": s.areal_density,
            },
            "stochastic": {
                "mu_tip_range": list(st.mu_tip_range),
                "mu_surface_range": list(st.mu_surface_range),
                "initial_deflection_range_mm": list(st.initial_deflection_range),
                "press_force_jitter_rel": st.press_force_jitter,
            },
            "engine": {
                "step_mm": es.step, "lift_rise_mm": es.lift_rise,
                "object_alpha_deg": es.object_alpha,
            },
            "grasp_sweep": {
                "alphas_deg": list(self.sweep_alphas),
                "pressures_kpa": list(self.sweep_pressures),
                "separation_mm": self.sweep_separation,
                "closure_mm": self.sweep_closure,
                "press_force_n": self.sweep_press_force,
            },
            "compare_rigid": {
                "conditions": [
                    {"key": c.key, "alpha_deg": c.alpha, "span_mm": c.span, "press_force_n": c.press_force}
                    for c in self.conditions
                ],
                "closures_mm": list(self.compare_closures),
                "pressure_kpa": self.compare_pressure,
            },
            "objects": {
                "pressures_kpa": list(self.object_pressures),
                "items": [
                    {
                        "name": o.name, "mass_kg": o.mass, "grasp_height_mm": o.grasp_height,
                        "edge_factor": o.edge_factor, "contact_mu": o.contact_mu_override,
                        "contact_alpha_deg": o.contact_alpha,
                    }
                    for o in self.objects
                ],
            },
        }

    def hash(self, command: str) -> str:
        return config_hash({"command": command, "config": self.to_dict()})


TOP_KEYS = (
    "seed", "n_trials", "workers", "output_dir", "geometry", "joint", "sheet",
    "stochastic", "engine", "grasp_sweep", "compare_rigid", "objects",
)


def _parse_conditions(raw) -> tuple[CompareCondition, ...]:
    known = {c.key: c for c in COMPARE_CONDITIONS}
    if not isinstance(raw, list) or not raw:
        raise ConfigError("compare_rigid.conditions: expected a nonempty list")
    out = []
    for item in raw:
        if isinstance(item, str):
            if item not in known:
                raise ConfigError(
                    f"compare_rigid.conditions: unknown condition key {item!r} "
                    f"(known: {sorted(known)})"
                )
            out.append(known[item])
        else:
            b = _block(item, "compare_rigid.conditions[]", ("key", "alpha_deg", "span_mm", "press_force_n"))
            missing = {"key", "alpha_deg", "span_mm", "press_force_n"} - set(b)
            if missing:
                raise ConfigError(f"compare_rigid.conditions[]: missing {sorted(missing)}")
            w = "compare_rigid.conditions[]"
            out.append(CompareCondition(
                str(b["key"]), _num(b, "alpha_deg", 0, w), _num(b, "span_mm", 0, w),
                _num(b, "press_force_n", 0, w),
            ))
    keys = [c.key for c in out]
    if len(set(keys)) != len(keys):
        raise ConfigError("compare_rigid.conditions: duplicate keys")
    return tuple(out)


def _parse_objects(raw) -> tuple[RigidObjectSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("objects.items: expected a nonempty list")
    allowed = ("name", "mass_kg", "grasp_height_mm", "edge_factor", "contact_mu", "contact_alpha_deg")
    out = []
    for item in raw:
        b = _block(item, "objects.items[]", allowed)
        if "name" not in b or "mass_kg" not in b:
            raise ConfigError("objects.items[]: name and mass_kg are required")
        w = f"objects.items[{b['name']}]"
        mu = b.get("contact_mu")
        ca = b.get("contact_alpha_deg")
        out.append(RigidObjectSpec(
            _num(b, "mass_kg", 0, w),
            _num(b, "grasp_height_mm", 20.0, w),
            _num(b, "edge_factor", 1.0, w),
            None if mu is None else _num(b, "contact_mu", 0, w),
            None if ca is None else _num(b, "contact_alpha_deg", 0, w),
            str(b["name"]),
        ))
    return tuple(out)


def parse_config(data: Any, base_dir: Path = Path(".")) -> RunConfig:
    """Build a :class:`RunConfig` from a parsed document; relative paths resolve against ``base_dir``."""
    top = _block(data, "config", TOP_KEYS)

    g = _block(top.get("geometry"), "geometry", ("r_c_mm", "d1_mm", "beta_deg", "alpha_max_deg", "a1_mm"))
    d = FingertipGeometry()
    geom = FingertipGeometry(
        _num(g, "r_c_mm", d.r_c, "geometry"), _num(g, "d1_mm", d.d1, "geometry"),
        _num(g, "beta_deg", d.beta, "geometry"), _num(g, "alpha_max_deg", d.alpha_max, "geometry"),
        _num(g, "a1_mm", d.a1, "geometry"),
    )

    j = _block(top.get("joint"), "joint", ("calibration_path", "k0_nmm_per_rad", "k1_nmm_per_rad_per_kpa"))
    has_path = "calibration_path" in j
    has_inline = "k0_nmm_per_rad" in j or "k1_nmm_per_rad_per_kpa" in j
    cal_sha = None
    if has_path and has_inline:
        raise ConfigError("joint: give either calibration_path or inline coefficients, not both")
    if has_path:
        path = Path(str(j["calibration_path"]))
        if not path.is_absolute():
            path = base_dir / path
        if not path.is_file():
            raise ConfigError(f"joint.calibration_path: {path} does not exist")
        grid = ingest_calibration_log(read_calibration_log(path), geom.a1)
        model = fit_model(grid, source=path.name)
        cal_sha = _sha256_file(path)
    elif has_inline:
        if not ("k0_nmm_per_rad" in j and "k1_nmm_per_rad_per_kpa" in j):
            raise ConfigError("joint: inline model needs both k0_nmm_per_rad and k1_nmm_per_rad_per_kpa")
        model = JointStiffnessModel(
            _num(j, "k0_nmm_per_rad", 0, "joint"), _num(j, "k1_nmm_per_rad_per_kpa", 0, "joint")
        )
    else:
        model = DEFAULT_MODEL

    s = _block(top.get("sheet"), "sheet", (
        "elastic_modulus_pa", "thickness_mm", "width_mm", "length_mm", "areal_density_kg_per_m2",
    ))
    ds = SheetSpec()
    sheet = SheetSpec(
        _num(s, "elastic_modulus_pa", ds.elastic_modulus, "sheet"),
        _num(s, "thickness_mm", ds.thickness, "sheet"),
        _num(s, "width_mm", ds.width, "sheet"),
        _num(s, "length_mm", ds.length, "sheet"),
        _num(s, "areal_density_kg_per_m2", ds.areal_density, "sheet"),
    )

    seed = top.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    st = _block(top.get("stochastic"), "stochastic", (
        "mu_tip_range", "mu_surface_range", "initial_deflection_range_mm", "press_force_jitter_rel",
    ))
    dst = StochasticParams()
    stoch = StochasticParams(
        _pair(st, "mu_tip_range", dst.mu_tip_range, "stochastic"),
        _pair(st, "mu_surface_range", dst.mu_surface_range, "stochastic"),
        _pair(st, "initial_deflection_range_mm", dst.initial_deflection_range, "stochastic"),
        _num(st, "press_force_jitter_rel", dst.press_force_jitter, "stochastic"),
        seed,
    )

    e = _block(top.get("engine"), "engine", ("step_mm", "lift_rise_mm", "object_alpha_deg"))
    settings = EngineSettings(
        _num(e, "step_mm", DEFAULT_SETTINGS.step, "engine"),
        _num(e, "lift_rise_mm", DEFAULT_SETTINGS.lift_rise, "engine"),
        _num(e, "object_alpha_deg", DEFAULT_SETTINGS.object_alpha, "engine"),
    )

    n_trials = top.get("n_trials", DEFAULT_TRIALS)
    workers = top.get("workers", 1)
    for name, v in (("n_trials", n_trials), ("workers", workers)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"{name}: expected a positive integer, got {v!r}")

    gs = _block(top.get("grasp_sweep"), "grasp_sweep", (
        "alphas_deg", "pressures_kpa", "separation_mm", "closure_mm", "press_force_n",
    ))
    cr = _block(top.get("compare_rigid"), "compare_rigid", ("conditions", "closures_mm", "pressure_kpa"))
    ob = _block(top.get("objects"), "objects", ("pressures_kpa", "items"))

    out_dir = top.get("output_dir")
    return RunConfig(
        geom=geom,
        joint_model=model,
        calibration_sha256=cal_sha,
        sheet=sheet,
        stoch=stoch,
        settings=settings,
        n_trials=n_trials,
        workers=workers,
        output_dir=None if out_dir is None else base_dir / str(out_dir),
        sweep_alphas=_nums(gs, "alphas_deg", SWEEP_ALPHAS, "grasp_sweep"),
        sweep_pressures=_nums(gs, "pressures_kpa", SWEEP_PRESSURES, "grasp_sweep"),
        sweep_separation=_num(gs, "separation_mm", SWEEP_SEPARATION, "grasp_sweep"),
        sweep_closure=_num(gs, "closure_mm", SWEEP_CLOSURE, "grasp_sweep"),
        sweep_press_force=_num(gs, "press_force_n", SWEEP_PRESS_FORCE, "grasp_sweep"),
        conditions=_parse_conditions(cr["conditions"]) if "conditions" in cr else COMPARE_CONDITIONS,
        compare_closures=_nums(cr, "closures_mm", COMPARE_CLOSURES, "compare_rigid"),
        compare_pressure=_num(cr, "pressure_kpa", COMPARE_PRESSURE, "compare_rigid"),
        objects=_parse_objects(ob["items"]) if "items" in ob else DEFAULT_OBJECTS,
        object_pressures=_nums(ob, "pressures_kpa", OBJECT_PRESSURES, "objects"),
    )


def load_config(path: Optional[Path]) -> RunConfig:
    if path is None:
        return RunConfig()
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, path.parent)


# ---------------------------------------------------------------------------
# artifact writers

def _stamp(digest: str, seed: int) -> str:
    return f"config_sha256={digest} seed={seed}"


def _svg_comment(digest: str, seed: int) -> str:
    return f"hybridgrip {__version__} {_stamp(digest, seed)}"


def _write(out_dir: Path, name: str, text: str, written: list[Path]) -> None:
    path = out_dir / name
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    written.append(path)


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _rate_series(report: SuccessRateReport, groups, xs, key_fn) -> list:
    return [(label, list(xs), [report.cell(key_fn(g, x)).rate for x in xs]) for label, g in groups]


def _write_report(out_dir: Path, stem: str, report: SuccessRateReport, svg: str, written) -> None:
    _write(out_dir, f"{stem}.csv", report.to_csv(), written)
    _write(out_dir, f"{stem}.json", report.to_json(), written)
    _write(out_dir, f"{stem}.svg", svg, written)


# ---------------------------------------------------------------------------
# subcommands

def cmd_calibrate(log_path: Path, out_dir: Path, cfg: RunConfig = RunConfig()) -> list[Path]:
    """Ingest a calibration log; write grid, fitted model and residual summary."""
    rows = read_calibration_log(log_path)
    grid = ingest_calibration_log(rows, cfg.geom.a1)
    model = fit_model(grid, source=log_path.name)
    digest = config_hash({
        "command": "calibrate", "log_sha256": _sha256_file(log_path), "a1_mm": cfg.geom.a1,
    })
    stamp = {"config_sha256": digest, "seed": cfg.seed}

    residuals = []
    for i, a in enumerate(grid.alphas):
        for j, p in enumerate(grid.pressures):
            fitted = ring_torque(model, float(a), float(p))
            measured = float(grid.torques[i, j])
            residuals.append({
                "alpha_deg": float(a), "pressure_kpa": float(p),
                "measured_nmm": measured, "fitted_nmm": fitted,
                "residual_nmm": fitted - measured,
            })
    worst = max(residuals, key=lambda r: abs(r["residual_nmm"]))
    summary = {
        **stamp,
        "n_rows": len(rows),
        "n_cells": len(residuals),
        "residual_rmse_nmm": model.residual_rmse,
        "max_abs_residual_nmm": abs(worst["residual_nmm"]),
        "worst_cell": {"alpha_deg": worst["alpha_deg"], "pressure_kpa": worst["pressure_kpa"]},
        "degenerate": model.degenerate,
        "cells": residuals,
    }
    written: list[Path] = []
    _write(out_dir, "calibration_grid.json", _dump_json({**stamp, **grid.to_dict()}), written)
    _write(out_dir, "joint_model.json", _dump_json({**stamp, **model.to_dict()}), written)
    _write(out_dir, "calibration_residuals.json", _dump_json(summary), written)
    return written


def torque_map_rows(model: JointStiffnessModel) -> list[tuple[float, float, float]]:
    return [(a, p, ring_torque(model, a, p)) for a in PROTOCOL_ALPHAS for p in PROTOCOL_PRESSURES]


def cmd_torque_map(cfg: RunConfig, out_dir: Path) -> list[Path]:
    """Ring torque over the protocol grid, as CSV and a line plot."""
    digest = cfg.hash("torque-map")
    rows = torque_map_rows(cfg.joint_model)
    buf = io.StringIO()
    buf.write(f"# {_stamp(digest, cfg.seed)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha_deg", "pressure_kpa", "torque_nmm"])
    for a, p, t in rows:
        writer.writerow([f"{a:g}", f"{p:g}", f"{t:.6f}"])
    series = [
        (f"{p:g} kPa", list(PROTOCOL_ALPHAS), [t for a, pp, t in rows if pp == p])
        for p in PROTOCOL_PRESSURES[::3]
    ]
    svg = line_chart(
        series, "Ring torque on the fingertip", "bend angle (deg)", "torque (N*mm)",
        _svg_comment(digest, cfg.seed),
    )
    written: list[Path] = []
    _write(out_dir, "torque_map.csv", buf.getvalue(), written)
    _write(out_dir, "torque_map.svg", svg, written)
    return written


def run_grasp_sweep(cfg: RunConfig, runner=None) -> SuccessRateReport:
    report = sweep_paper_campaign(
        cfg.sweep_alphas, cfg.sweep_pressures, cfg.stoch, cfg.n_trials, cfg.context, cfg.sheet,
        cfg.sweep_separation, cfg.sweep_closure, cfg.sweep_press_force, runner,
    )
    return replace(report, config_hash=cfg.hash("grasp-sweep"))


def cmd_grasp_sweep(cfg: RunConfig, out_dir: Path, runner=None) -> list[Path]:
    report = run_grasp_sweep(cfg, runner)
    series = _rate_series(
        report, [(f"alpha {a:g} deg", a) for a in cfg.sweep_alphas], cfg.sweep_pressures, sweep_key
    )
    svg = line_chart(
        series, "Sheet grasp success rate", "ring pressure (kPa)", "success rate",
        _svg_comment(report.config_hash, report.seed), y_range=(0.0, 1.0),
    )
    written: list[Path] = []
    _write_report(out_dir, "grasp_sweep", report, svg, written)
    return written


def cmd_compare_rigid(cfg: RunConfig, out_dir: Path) -> tuple[list[Path], SuccessRateReport]:
    report = rigid_vs_hybrid_campaign(
        cfg.conditions, cfg.compare_closures, cfg.stoch, cfg.n_trials, cfg.context,
        cfg.compare_pressure, cfg.sheet,
    )
    report = replace(report, config_hash=cfg.hash("compare-rigid"))
    series = []
    for cond in cfg.conditions:
        for mode in ("hybrid", "rigid"):
            series.append((
                f"{mode} {cond.key}",
                list(cfg.compare_closures),
                [report.cell(compare_key(mode, cond, c)).rate for c in cfg.compare_closures],
            ))
    svg = line_chart(
        series, "Success rate against closing distance", "closing distance (mm)", "success rate",
        _svg_comment(report.config_hash, report.seed), y_range=(0.0, 1.0),
    )
    written: list[Path] = []
    _write_report(out_dir, "compare_rigid", report, svg, written)
    return written, report


def cmd_objects(cfg: RunConfig, out_dir: Path) -> list[Path]:
    report = objects_campaign(cfg.objects, cfg.object_pressures, cfg.stoch, cfg.n_trials, cfg.context)
    report = replace(report, config_hash=cfg.hash("objects"))
    series = _rate_series(report, [(o.name, o) for o in cfg.objects], cfg.object_pressures, object_key)
    svg = line_chart(
        series, "Object grasp success rate", "ring pressure (kPa)", "success rate",
        _svg_comment(report.config_hash, report.seed), y_range=(0.0, 1.0),
    )
    written: list[Path] = []
    _write_report(out_dir, "objects", report, svg, written)
    return written


# ---------------------------------------------------------------------------
# entry point

def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="YAML run configuration")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--seed", type=_u64, default=None, help="overrides the config seed")
    common.add_argument("--trials", type=_positive, default=None, help="trials per cell")

    parser = argparse.ArgumentParser(
        prog="hybridgrip", description="Quasi-static hybrid soft/rigid gripper simulator."
    )
    parser.add_argument("--version", action="version", version=f"hybridgrip {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    cal = sub.add_parser("calibrate", parents=[common], help="fit the ring model to a force log")
    cal.add_argument("log", type=Path, help="calibration CSV (alpha_deg,pressure_kpa,fy_n,fz_n)")
    sub.add_parser("torque-map", parents=[common], help="ring torque over the protocol grid")
    sub.add_parser("grasp-sweep", parents=[common], help="sheet success rate over angle x pressure")
    cmp_ = sub.add_parser("compare-rigid", parents=[common], help="hybrid vs rigid closing distance")
    cmp_.add_argument("--conditions", default=None, help="comma-separated condition keys, e.g. c1,c2")
    sub.add_parser("objects", parents=[common], help="object success rate over pressure")
    return parser


def _resolve(args) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, stoch=replace(cfg.stoch, seed=args.seed))
    if args.trials is not None:
        cfg = replace(cfg, n_trials=args.trials)
    if getattr(args, "conditions", None):
        cfg = replace(cfg, conditions=_parse_conditions(args.conditions.split(",")))
    out_dir = args.out or cfg.output_dir or Path("hybridgrip-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def _dispatch(args) -> int:
    cfg, out_dir = _resolve(args)
    status = EXIT_OK
    if args.command == "calibrate":
        if not args.log.is_file():
            raise ConfigError(f"calibration log {args.log} does not exist")
        written = cmd_calibrate(args.log, out_dir, cfg)
    elif args.command == "torque-map":
        written = cmd_torque_map(cfg, out_dir)
    elif args.command == "grasp-sweep":
        written = cmd_grasp_sweep(cfg, out_dir)
    elif args.command == "compare-rigid":
        written, report = cmd_compare_rigid(cfg, out_dir)
        if report.extras["max_closure_ratio"] is None:
            print("error: no condition is feasible in both modes; see compare_rigid.json", file=sys.stderr)
            status = EXIT_INFEASIBLE
    elif args.command == "objects":
        written = cmd_objects(cfg, out_dir)
    else:  # pragma: no cover - argparse guards this
        raise ConfigError(f"unknown command {args.command!r}")
    for path in written:
        print(f"wrote {path}")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return _dispatch(args)
    except (ConfigError, IngestionError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (EngineError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
