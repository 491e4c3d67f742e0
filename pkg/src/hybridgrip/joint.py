"""Resisting-torque model of the soft pneumatic ring around the distal joint.

Pipeline: force-sensor log -> per-cell mean torque grid -> fitted
separable model ``tau = (k0 + k1 * p) * alpha_rad`` -> algebraic inverse.
Torques are N*mm, angles degrees, pressures kPa.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from hybridgrip.errors import DomainError, IngestionError, InfeasibleError

log = logging.getLogger(__name__)

ALPHA_RANGE = (0.0, 80.0)
PRESSURE_RANGE = (0.0, 150.0)
LOG_HEADER = ("alpha_deg", "pressure_kpa", "fy_n", "fz_n")

DEFAULT_K0 = 200.0  # N*mm/rad
DEFAULT_K1 = 4.0  # N*mm/rad/kPa
PROTOCOL_ALPHAS = tuple(float(a) for a in range(0, 81, 5))
PROTOCOL_PRESSURES = tuple(float(p) for p in range(0, 151, 10))


def torque_from_forces(f_y: float, f_z: float, alpha: float, a1: float) -> float:
    """Resisting torque from the base reaction forces of the testing fingertip.

    Can be negative; the caller decides whether that is a valid sample.
    """
    if not 0.0 <= alpha <= 90.0:
        raise DomainError(f"alpha={alpha} deg outside [0, 90]")
    a = math.radians(alpha)
    return f_z * a1 * math.sin(a) - f_y * a1 * math.cos(a)


def forces_for_torque(tau: float, alpha: float, a1: float) -> tuple[float, float]:
    """(f_y, f_z) of a base reaction perpendicular to the lever giving ``tau``."""
    a = math.radians(alpha)
    return -tau * math.cos(a) / a1, tau * math.sin(a) / a1


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JointCalibrationGrid:
    """Mean resisting torque per (alpha, pressure) cell."""

    alphas: np.ndarray
    pressures: np.ndarray
    torques: np.ndarray  # shape (len(alphas), len(pressures)), N*mm
    trials_per_cell: np.ndarray  # same shape, int

    def __post_init__(self):
        object.__setattr__(self, "alphas", _frozen(self.alphas))
        object.__setattr__(self, "pressures", _frozen(self.pressures))
        object.__setattr__(self, "torques", _frozen(self.torques))
        object.__setattr__(
            self, "trials_per_cell", _frozen(self.trials_per_cell, dtype=int)
        )
        a, p, t = self.alphas, self.pressures, self.torques
        if a.ndim != 1 or p.ndim != 1 or len(a) == 0 or len(p) == 0:
            raise DomainError("grid axes must be nonempty 1-D sequences")
        if np.any(np.diff(a) <= 0) or np.any(np.diff(p) <= 0):
            raise DomainError("grid axes must be strictly increasing")
        if a[0] < ALPHA_RANGE[0] or a[-1] > ALPHA_RANGE[1]:
            raise DomainError(f"alphas outside {ALPHA_RANGE} deg")
        if p[0] < PRESSURE_RANGE[0] or p[-1] > PRESSURE_RANGE[1]:
            raise DomainError(f"pressures outside {PRESSURE_RANGE} kPa")
        if t.shape != (len(a), len(p)) or self.trials_per_cell.shape != t.shape:
            raise DomainError(
                f"torque matrix shape {t.shape} != ({len(a)}, {len(p)})"
            )
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise DomainError("torques must be finite and nonnegative")

    @classmethod
    def from_model(cls, k0, k1, alphas=PROTOCOL_ALPHAS, pressures=PROTOCOL_PRESSURES, trials=10):
        model = JointStiffnessModel(k0, k1)
        t = [[ring_torque(model, a, p) for p in pressures] for a in alphas]
        counts = np.full((len(alphas), len(pressures)), trials)
        return cls(alphas, pressures, t, counts)

    def to_dict(self) -> dict:
        return {
            "alphas_deg": self.alphas.tolist(),
            "pressures_kpa": self.pressures.tolist(),
            "torques_nmm": self.torques.tolist(),
            "trials_per_cell": self.trials_per_cell.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JointCalibrationGrid":
        return cls(
            data["alphas_deg"],
            data["pressures_kpa"],
            data["torques_nmm"],
            data["trials_per_cell"],
        )


@dataclass(frozen=True)
class JointStiffnessModel:
    """tau(alpha, p) = (k0 + k1 * p) * alpha_rad."""

    k0: float  # N*mm/rad
    k1: float  # N*mm/rad/kPa
    residual_rmse: float = 0.0  # N*mm
    source_grid: str = "inline"
    degenerate: bool = False

    def __post_init__(self):
        if self.k0 < 0 or self.k1 < 0:
            raise DomainError("k0 and k1 must be nonnegative")
        if self.residual_rmse < 0:
            raise DomainError("residual_rmse must be nonnegative")

    def stiffness(self, pressure: float) -> float:
        """Torsional stiffness at ``pressure`` in N*mm/rad."""
        return self.k0 + self.k1 * pressure

    def to_dict(self) -> dict:
        return {
            "k0_nmm_per_rad": self.k0,
            "k1_nmm_per_rad_per_kpa": self.k1,
            "residual_rmse_nmm": self.residual_rmse,
            "source_grid": self.source_grid,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JointStiffnessModel":
        return cls(
            float(data["k0_nmm_per_rad"]),
            float(data["k1_nmm_per_rad_per_kpa"]),
            float(data.get("residual_rmse_nmm", 0.0)),
            str(data.get("source_grid", "inline")),
            bool(data.get("degenerate", False)),
        )


DEFAULT_MODEL = JointStiffnessModel(DEFAULT_K0, DEFAULT_K1, source_grid="default")


def read_calibration_log(path) -> list[tuple[float, float, float, float]]:
    """Parse a calibration CSV into (alpha, pressure, f_y, f_z) rows."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestionError("no rows")
        if tuple(h.strip() for h in header) != LOG_HEADER:
            raise IngestionError(
                f"expected header {','.join(LOG_HEADER)}, got {','.join(header)}",
                line=1,
            )
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise IngestionError(f"expected 4 fields, got {len(row)}", line)
            try:
                vals = tuple(float(c) for c in row)
            except ValueError:
                raise IngestionError(f"non-numeric field in {row!r}", line) from None
            if not all(math.isfinite(v) for v in vals):
                raise IngestionError(f"non-finite field in {row!r}", line)
            rows.append((vals, line))
    if not rows:
        raise IngestionError("no rows")
    _check_ranges(rows)
    return [vals for vals, _ in rows]


def _check_ranges(rows):
    for (alpha, pressure, _, _), line in rows:
        if not ALPHA_RANGE[0] <= alpha <= ALPHA_RANGE[1]:
            raise IngestionError(f"alpha {alpha} deg outside {ALPHA_RANGE}", line)
        if not PRESSURE_RANGE[0] <= pressure <= PRESSURE_RANGE[1]:
            raise IngestionError(
                f"pressure {pressure} kPa outside {PRESSURE_RANGE}", line
            )


def write_calibration_log(rows: Iterable[Sequence[float]], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def ingest_calibration_log(rows, a1: float = 50.0) -> JointCalibrationGrid:
    """Average the per-trial torques of each (alpha, pressure) cell.

    ``rows`` holds (alpha_deg, pressure_kpa, fy_n, fz_n) tuples; every
    combination of the observed alphas and pressures must be present.
    """
    rows = list(rows)
    if not rows:
        raise IngestionError("no rows")
    _check_ranges([(tuple(r), i + 2) for i, r in enumerate(rows)])
    cells: dict[tuple[float, float], list[float]] = defaultdict(list)
    for alpha, pressure, f_y, f_z in rows:
        cells[(float(alpha), float(pressure))].append(
            torque_from_forces(f_y, f_z, alpha, a1)
        )
    alphas = sorted({a for a, _ in cells})
    pressures = sorted({p for _, p in cells})
    torques = np.empty((len(alphas), len(pressures)))
    counts = np.empty_like(torques, dtype=int)
    for i, a in enumerate(alphas):
        for j, p in enumerate(pressures):
            taus = cells.get((a, p))
            if not taus:
                raise IngestionError(f"empty cell (alpha={a:g} deg, pressure={p:g} kPa)")
            mean = math.fsum(taus) / len(taus)
            if mean < 0:
                raise IngestionError(
                    f"negative mean torque {mean:.4g} N*mm in cell "
                    f"(alpha={a:g} deg, pressure={p:g} kPa)"
                )
            torques[i, j] = mean
            counts[i, j] = len(taus)
    return JointCalibrationGrid(alphas, pressures, torques, counts)


def _bracket(axis: np.ndarray, x: float, name: str) -> tuple[int, int, float]:
    if not axis[0] <= x <= axis[-1]:
        raise DomainError(f"{name}={x} outside grid range [{axis[0]}, {axis[-1]}]")
    if len(axis) == 1:
        return 0, 0, 0.0
    j = int(np.searchsorted(axis, x, side="right")) - 1
    j = min(max(j, 0), len(axis) - 2)
    t = (x - axis[j]) / (axis[j + 1] - axis[j])
    return j, j + 1, t


def ring_torque_grid(grid: JointCalibrationGrid, alpha: float, pressure: float) -> float:
    """Bilinear interpolation of the calibration grid; no extrapolation."""
    i0, i1, s = _bracket(grid.alphas, alpha, "alpha")
    j0, j1, t = _bracket(grid.pressures, pressure, "pressure")
    T = grid.torques
    # exact at nodes: weights collapse to a single corner
    if s == 0.0 and t == 0.0:
        return float(T[i0, j0])
    return float(
        (1 - s) * (1 - t) * T[i0, j0]
        + (1 - s) * t * T[i0, j1]
        + s * (1 - t) * T[i1, j0]
        + s * t * T[i1, j1]
    )


def fit_model(grid: JointCalibrationGrid, source: str = "grid") -> JointStiffnessModel:
    """Nonnegative least-squares fit of ``(k0 + k1 p) alpha_rad`` to the grid."""
    if len(grid.alphas) < 2 or len(grid.pressures) < 2:
        raise DomainError("fit needs at least 2 alphas and 2 pressures")
    a_rad, p = np.meshgrid(np.radians(grid.alphas), grid.pressures, indexing="ij")
    y = grid.torques.ravel()
    if not np.any(y):
        log.warning("calibration grid is all zero; returning a zero-stiffness model")
        return JointStiffnessModel(0.0, 0.0, 0.0, source, degenerate=True)
    A = np.column_stack([a_rad.ravel(), (a_rad * p).ravel()])
    coef, _ = nnls(A, y)
    # polish: nnls stops at ~1e-10 relative, one lstsq pass on the active set is exact
    active = coef > 0
    if active.any():
        sol, *_ = np.linalg.lstsq(A[:, active], y, rcond=None)
        if np.all(sol >= 0):
            coef = np.zeros(2)
            coef[active] = sol
    resid = A @ coef - y
    rmse = float(math.sqrt(float(np.mean(resid**2))))
    return JointStiffnessModel(float(coef[0]), float(coef[1]), rmse, source)


def ring_torque(model: JointStiffnessModel, alpha: float, pressure: float) -> float:
    """Resisting torque (N*mm) of the ring at bend ``alpha`` and ``pressure``."""
    if alpha < 0 or pressure < 0:
        raise DomainError("alpha and pressure must be nonnegative")
    return (model.k0 + model.k1 * pressure) * math.radians(alpha)


def required_pressure(model: JointStiffnessModel, alpha: float, tau_target: float) -> float:
    """Pressure (kPa) at which the ring resists ``tau_target`` at ``alpha``."""
    if alpha <= 0:
        raise DomainError("alpha must be positive to invert the model")
    a = math.radians(alpha)
    base = model.k0 * a
    if model.k1 <= 0:
        if math.isclose(tau_target, base, rel_tol=1e-12, abs_tol=1e-12):
            return 0.0
        raise InfeasibleError("pressure has no effect on a model with k1 = 0")
    if tau_target < base and not math.isclose(tau_target, base, rel_tol=1e-12):
        raise InfeasibleError(
            f"target {tau_target:.4g} N*mm is below the zero-pressure torque {base:.4g}"
        )
    return max(0.0, (tau_target / a - model.k0) / model.k1)


def save_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path) -> JointStiffnessModel:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return JointStiffnessModel.from_dict(data)
