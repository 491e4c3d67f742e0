"""Thin-sheet mechanics: bending stiffness, moment-curvature, Euler buckling
and first-mode buckle amplitude.

Boundary units are mm, Pa, kg/m^2; everything is converted to SI here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from hybridgrip.errors import DomainError

MM = 1e-3
GRAVITY = 9.81  # m/s^2

# knockdown = 1 - IMPERFECTION_GAIN * (deflection / thickness)
IMPERFECTION_GAIN = 0.1


@dataclass(frozen=True)
class SheetSpec:
    elastic_modulus: float = 2.0e9  # Pa, paperboard-like (assumed)
    thickness: float = 0.5  # mm
    width: float = 48.0  # mm, across the fingers
    length: float = 210.0  # mm, along the closing axis
    areal_density: float = 0.08  # kg/m^2 (assumed)
    initial_deflection: float = 0.0  # mm, mid-span rise of the unloaded sheet

    def __post_init__(self):
        for name in ("thickness", "width", "length"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.elastic_modulus < 0 or self.areal_density < 0:
            raise DomainError("elastic_modulus and areal_density must be >= 0")
        if self.initial_deflection < 0:
            raise DomainError("initial_deflection must be >= 0")
        if self.thickness > self.length / 20:
            raise DomainError("sheet is not thin: thickness > length / 20")

    @property
    def mass(self) -> float:
        """Sheet mass in kg."""
        return self.areal_density * self.width * MM * self.length * MM

    @property
    def weight(self) -> float:
        return self.mass * GRAVITY


def bending_stiffness(spec: SheetSpec) -> float:
    """Bending stiffness per unit width, E t^3 / 12 (N*m)."""
    return spec.elastic_modulus * (spec.thickness * MM) ** 3 / 12.0


def moment_for_curvature(s_b: float, width_b: float, radius_r: float) -> float:
    """Bending moment (N*m) that curls a strip of width ``width_b`` mm to radius ``radius_r`` mm."""
    if radius_r <= 0 or width_b <= 0:
        raise DomainError("radius and width must be positive")
    return s_b * (width_b * MM) / (radius_r * MM)


def critical_buckling_load(spec: SheetSpec, span_d: float) -> float:
    """Pinned-pinned Euler load (N) of the strip between the contacts."""
    if span_d <= 0:
        raise DomainError(f"span_d={span_d} mm must be positive")
    return math.pi**2 * bending_stiffness(spec) * spec.width * MM / (span_d * MM) ** 2


def imperfection_knockdown(spec: SheetSpec) -> float:
    return max(0.0, 1.0 - IMPERFECTION_GAIN * spec.initial_deflection / spec.thickness)


def effective_buckling_load(spec: SheetSpec, span_d: float) -> float:
    """Euler load reduced by the initial-deflection knockdown."""
    return critical_buckling_load(spec, span_d) * imperfection_knockdown(spec)


def buckle_amplitude(span_d: float, end_shortening_c: float) -> float:
    """Mid-span rise (mm) of an inextensible first-mode buckle.

    From the arc-length excess of a half sine, c = (pi w)^2 / (4 d).
    """
    if span_d <= 0:
        raise DomainError(f"span_d={span_d} mm must be positive")
    if not 0 <= end_shortening_c < span_d:
        raise DomainError(
            f"end shortening {end_shortening_c} mm outside [0, {span_d})"
        )
    return (2.0 / math.pi) * math.sqrt(span_d * end_shortening_c)


def shortening_for_amplitude(span_d: float, w: float) -> float:
    """Inverse of :func:`buckle_amplitude`."""
    if span_d <= 0 or w < 0:
        raise DomainError("span_d must be positive and w nonnegative")
    return (math.pi * w / 2.0) ** 2 / span_d
