"""Success-rate estimation over sampled contact and sheet parameters.

Every trial index owns its own counter-based Philox stream keyed by the
campaign seed, so trial ``i`` sees the same draw in every scenario of a
campaign (common random numbers).  Because the engine is monotone in
pressure and closure, rates built this way are exactly monotone too.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from statistics import NormalDist
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from hybridgrip.engine import (
    DEFAULT_SETTINGS,
    ContactParams,
    EngineSettings,
    GraspScenario,
    RigidObjectSpec,
    grasp_rigid_object,
    min_closure_for_success,
    run_trial,
)
from hybridgrip.errors import DomainError, EngineError, InfeasibleError
from hybridgrip.geometry import FingertipGeometry, separation_for_span
from hybridgrip.joint import DEFAULT_MODEL, JointStiffnessModel
from hybridgrip.sheet import SheetSpec

Z95 = NormalDist().inv_cdf(0.975)

ASSUMPTIONS = (
    "ring torque model tau = (k0 + k1 p) alpha_rad (separable, zero at alpha = 0)",
    "default calibration k0 = 200 N*mm/rad, k1 = 4 N*mm/rad/kPa (synthetic, not measured)",
    "sheet E = 2 GPa and areal density 0.08 kg/m^2 are handbook values; "
    "0.5 mm thickness is unusually thick for paper",
    "pinned-pinned Euler buckling with imperfection knockdown 1 - 0.1 delta0/t",
    "friction coefficients, initial deflection and press-force jitter are sampled, "
    "not measured",
    "sheet counts as lifted at 29.5 mm buckle rise",
    "rigid gripper modelled as the same fingertip locked at alpha = 0",
    "finger separation back-solved from the contact span for the comparison conditions",
)


@dataclass(frozen=True)
class StochasticParams:
    mu_tip_range: tuple[float, float] = (0.6, 1.2)
    mu_surface_range: tuple[float, float] = (0.2, 0.4)
    initial_deflection_range: tuple[float, float] = (0.1, 1.0)  # mm
    press_force_jitter: float = 0.10  # relative half-width
    seed: int = 42

    def __post_init__(self):
        for name in ("mu_tip_range", "mu_surface_range", "initial_deflection_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise DomainError(f"{name}: lo > hi")
            object.__setattr__(self, name, (float(lo), float(hi)))
        for name in ("mu_tip_range", "mu_surface_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi > 2:
                raise DomainError(f"{name} outside [0, 2]")
        if self.initial_deflection_range[0] < 0:
            raise DomainError("initial deflection must be nonnegative")
        if not 0 <= self.press_force_jitter < 1:
            raise DomainError("press_force_jitter must be in [0, 1)")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    def nominal(self) -> "TrialDraw":
        """Median draw: mid-range values and no jitter."""
        mid = lambda r: 0.5 * (r[0] + r[1])  # noqa: E731
        return TrialDraw(
            ContactParams(mid(self.mu_tip_range), mid(self.mu_surface_range)),
            mid(self.initial_deflection_range),
            0.0,
        )


@dataclass(frozen=True)
class TrialDraw:
    contact: ContactParams
    initial_deflection: float  # mm
    press_jitter: float  # relative, applied as N1 * (1 + jitter)


def _uniform(u: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    if lo == hi:
        return lo
    return lo + (hi - lo) * u


def sample_params(stoch: StochasticParams, trial_index: int) -> TrialDraw:
    """Draw for trial ``trial_index``; a pure function of (seed, index)."""
    if trial_index < 0:
        raise DomainError("trial_index must be nonnegative")
    bitgen = np.random.Philox(key=stoch.seed, counter=[0, 0, trial_index, 0])
    u = np.random.Generator(bitgen).random(4)
    j = stoch.press_force_jitter
    return TrialDraw(
        ContactParams(
            _uniform(u[0], stoch.mu_tip_range), _uniform(u[1], stoch.mu_surface_range)
        ),
        _uniform(u[2], stoch.initial_deflection_range),
        0.0 if j == 0 else -j + 2 * j * float(u[3]),
    )


@lru_cache(maxsize=16)
def _draws(stoch: StochasticParams, n_trials: int) -> tuple[TrialDraw, ...]:
    return tuple(sample_params(stoch, i) for i in range(n_trials))


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0 or not 0 <= k <= n:
        raise DomainError(f"invalid counts k={k}, n={n}")
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # clamp rounding so the interval always contains the rate
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class RateCell:
    key: str
    n_trials: int
    n_success: int
    rate: float
    ci_lo: float
    ci_hi: float

    @classmethod
    def from_counts(cls, key: str, n: int, k: int) -> "RateCell":
        lo, hi = wilson_interval(k, n)
        return cls(key, n, k, k / n, lo, hi)

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "n_trials": self.n_trials,
            "n_success": self.n_success,
            "rate": self.rate,
            "wilson_95": [self.ci_lo, self.ci_hi],
        }


@dataclass(frozen=True)
class SuccessRateReport:
    campaign_id: str
    seed: int
    cells: tuple[RateCell, ...]
    assumptions: tuple[str, ...] = ASSUMPTIONS
    extras: dict = field(default_factory=dict)
    config_hash: str = ""

    def cell(self, key: str) -> RateCell:
        for c in self.cells:
            if c.key == key:
                return c
        raise KeyError(key)

    def to_dict(self) -> dict:
        return {
            "campaign_id": self.campaign_id,
            "seed": self.seed,
            "config_sha256": self.config_hash,
            "assumptions": list(self.assumptions),
            "cells": [c.to_dict() for c in self.cells],
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# config_sha256={self.config_hash} seed={self.seed}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["campaign", "cell_key", "n", "k", "rate", "ci_lo", "ci_hi"])
        for c in self.cells:
            writer.writerow(
                [
                    self.campaign_id,
                    c.key,
                    c.n_trials,
                    c.n_success,
                    f"{c.rate:.6f}",
                    f"{c.ci_lo:.6f}",
                    f"{c.ci_hi:.6f}",
                ]
            )
        return buf.getvalue()


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class SimContext:
    """Everything a trial needs besides the scenario and the draw."""

    geom: FingertipGeometry = FingertipGeometry()
    joint_model: JointStiffnessModel = DEFAULT_MODEL
    settings: EngineSettings = replace(DEFAULT_SETTINGS, record_trace=False)
    workers: int = 1


DEFAULT_CONTEXT = SimContext()


def apply_draw(scenario: GraspScenario, draw: TrialDraw) -> GraspScenario:
    target = scenario.sheet_or_object
    if isinstance(target, SheetSpec):
        target = replace(target, initial_deflection=draw.initial_deflection)
    return replace(
        scenario,
        press_force=scenario.press_force * (1.0 + draw.press_jitter),
        sheet_or_object=target,
    )


def _trial(args) -> bool:
    scenario, draw, ctx = args
    try:
        return run_trial(
            apply_draw(scenario, draw), ctx.geom, ctx.joint_model, draw.contact, ctx.settings
        ).success
    except (DomainError, EngineError) as exc:
        raise EngineError(f"trial failed for {scenario}: {exc}") from exc


def aggregate(key: str, results: Iterable[tuple[int, bool]]) -> RateCell:
    """Reduce (trial_index, success) pairs in index order."""
    ordered = sorted(results)
    idx = [i for i, _ in ordered]
    if len(set(idx)) != len(idx):
        raise EngineError(f"duplicate trial indices in cell {key}")
    return RateCell.from_counts(key, len(ordered), sum(1 for _, ok in ordered if ok))


def run_cells(
    cells: Sequence[tuple[str, GraspScenario]],
    stoch: StochasticParams,
    n_trials: int,
    ctx: SimContext = DEFAULT_CONTEXT,
    runner: Optional[Callable] = None,
) -> list[RateCell]:
    """Run ``n_trials`` common-random-number trials for every scenario."""
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    draws = _draws(stoch, n_trials)
    jobs = [(ci, i, (sc, d, ctx)) for ci, (_, sc) in enumerate(cells) for i, d in enumerate(draws)]
    if runner is not None:
        flags = [runner(job) for _, _, job in jobs]
    elif ctx.workers > 1:
        with ProcessPoolExecutor(ctx.workers) as pool:
            flags = list(pool.map(_trial, [j for _, _, j in jobs], chunksize=512))
    else:
        flags = [_trial(j) for _, _, j in jobs]
    per_cell: list[list[tuple[int, bool]]] = [[] for _ in cells]
    for (ci, i, _), ok in zip(jobs, flags):
        per_cell[ci].append((i, bool(ok)))
    return [aggregate(key, res) for (key, _), res in zip(cells, per_cell)]


def success_rate(
    scenario: GraspScenario,
    stoch: StochasticParams,
    n_trials: int,
    ctx: SimContext = DEFAULT_CONTEXT,
    key: str = "scenario",
) -> RateCell:
    return run_cells([(key, scenario)], stoch, n_trials, ctx)[0]


# sheet-sweep protocol: fingers 30 mm apart, 5 mm closure, 9 N press for every angle
SWEEP_ALPHAS = (35.0, 45.0, 65.0)
SWEEP_PRESSURES = tuple(float(p) for p in range(0, 151, 10))
SWEEP_SEPARATION = 30.0
SWEEP_CLOSURE = 5.0
SWEEP_PRESS_FORCE = 9.0


def sweep_key(alpha: float, pressure: float) -> str:
    return f"alpha={alpha:g}|p={pressure:g}"


def sweep_paper_campaign(
    alphas: Sequence[float] = SWEEP_ALPHAS,
    pressures: Sequence[float] = SWEEP_PRESSURES,
    stoch: StochasticParams = StochasticParams(),
    n_trials: int = 1000,
    ctx: SimContext = DEFAULT_CONTEXT,
    sheet: SheetSpec = SheetSpec(),
    d_f: float = SWEEP_SEPARATION,
    close_by: float = SWEEP_CLOSURE,
    press_force: float = SWEEP_PRESS_FORCE,
    runner: Optional[Callable] = None,
) -> SuccessRateReport:
    """Hybrid sheet-grasp success rate over bend angle x ring pressure."""
    cells = [
        (sweep_key(a, p), GraspScenario("hybrid", a, p, d_f, close_by, press_force, sheet))
        for a in alphas
        for p in pressures
    ]
    rates = run_cells(cells, stoch, n_trials, ctx, runner)
    return SuccessRateReport("grasp-sweep", stoch.seed, tuple(rates))


DEFAULT_OBJECTS = (
    RigidObjectSpec(0.12, 50.0, 0.47, name="paper_roll"),
    RigidObjectSpec(0.08, 30.0, 0.34, name="plastic_box"),
    RigidObjectSpec(0.20, 60.0, 0.59, name="pet_bottle"),
    RigidObjectSpec(0.04, 15.0, 0.10, name="glue_stick"),
    RigidObjectSpec(0.10, 25.0, 0.38, name="charger"),
)
OBJECT_PRESSURES = SWEEP_PRESSURES


def object_key(obj: RigidObjectSpec, pressure: float) -> str:
    return f"object={obj.name}|p={pressure:g}"


def objects_campaign(
    objects: Sequence[RigidObjectSpec] = DEFAULT_OBJECTS,
    pressures: Sequence[float] = OBJECT_PRESSURES,
    stoch: StochasticParams = StochasticParams(),
    n_trials: int = 1000,
    ctx: SimContext = DEFAULT_CONTEXT,
) -> SuccessRateReport:
    """Per-object, per-pressure squeeze-and-lift success rates."""
    if not objects:
        raise DomainError("objects campaign needs at least one object")
    draws = _draws(stoch, n_trials)
    cells = []
    for obj in objects:
        for p in pressures:
            flags = [
                grasp_rigid_object(obj, p, ctx.geom, ctx.joint_model, d.contact, ctx.settings).success
                for d in draws
            ]
            cells.append(aggregate(object_key(obj, p), enumerate(flags)))
    return SuccessRateReport("objects", stoch.seed, tuple(cells))


@dataclass(frozen=True)
class CompareCondition:
    key: str
    alpha: float  # deg
    span: float  # contact span d (mm)
    press_force: float  # N1 (N)


COMPARE_CONDITIONS = (
    CompareCondition("c1", 35.0, 60.0, 6.0),
    CompareCondition("c2", 45.0, 65.0, 9.0),
    CompareCondition("c3", 65.0, 70.0, 14.0),
)
RIGID_ALPHA = 0.0
COMPARE_PRESSURE = 100.0
COMPARE_CLOSURES = tuple(float(c) for c in range(0, 51, 5))


def condition_scenario(
    cond: CompareCondition,
    mode: str,
    close_by: float,
    geom: FingertipGeometry,
    pressure: float = COMPARE_PRESSURE,
    sheet: SheetSpec = SheetSpec(),
) -> GraspScenario:
    """Scenario for a comparison condition; commanded closure is clipped at the finger gap."""
    alpha = cond.alpha if mode == "hybrid" else RIGID_ALPHA
    d_f0 = separation_for_span(cond.span, alpha, geom)
    return GraspScenario(mode, alpha, pressure, d_f0, min(close_by, d_f0), cond.press_force, sheet)


def compare_key(mode: str, cond: CompareCondition, closure: float) -> str:
    return f"mode={mode}|cond={cond.key}|closure={closure:g}"


def rigid_vs_hybrid_campaign(
    conditions: Sequence[CompareCondition] = COMPARE_CONDITIONS,
    closures: Sequence[float] = COMPARE_CLOSURES,
    stoch: StochasticParams = StochasticParams(),
    n_trials: int = 1000,
    ctx: SimContext = DEFAULT_CONTEXT,
    pressure: float = COMPARE_PRESSURE,
    sheet: SheetSpec = SheetSpec(),
    runner: Optional[Callable] = None,
) -> SuccessRateReport:
    """Closure curves for both modes plus nominal minimum closures."""
    cells = [
        (compare_key(mode, cond, c), condition_scenario(cond, mode, c, ctx.geom, pressure, sheet))
        for cond in conditions
        for mode in ("hybrid", "rigid")
        for c in closures
    ]
    rates = run_cells(cells, stoch, n_trials, ctx, runner)

    nominal = stoch.nominal()
    min_closure: dict[str, dict[str, Optional[float]]] = {}
    ratios: dict[str, Optional[float]] = {}
    for cond in conditions:
        entry: dict[str, Optional[float]] = {}
        for mode in ("hybrid", "rigid"):
            sc = apply_draw(condition_scenario(cond, mode, 0.0, ctx.geom, pressure, sheet), nominal)
            try:
                entry[mode] = round(
                    min_closure_for_success(sc, ctx.geom, ctx.joint_model, nominal.contact, ctx.settings), 6
                )
            except InfeasibleError:
                entry[mode] = None
        min_closure[cond.key] = entry
        h, r = entry["hybrid"], entry["rigid"]
        ratios[cond.key] = round(r / h, 6) if h and r else None
    feasible = [v for v in ratios.values() if v is not None]
    extras = {
        "pressure_kpa": pressure,
        "min_closure_mm": min_closure,
        "closure_ratio_rigid_over_hybrid": ratios,
        "max_closure_ratio": max(feasible) if feasible else None,
        "conditions": {
            c.key: {"alpha_deg": c.alpha, "span_mm": c.span, "press_force_n": c.press_force}
            for c in conditions
        },
    }
    return SuccessRateReport("compare-rigid", stoch.seed, tuple(rates), extras=extras)
