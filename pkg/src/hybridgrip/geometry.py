"""Closed-form kinematics of the finger body, distal joint and curved fingertip.

Lengths are millimetres and angles are degrees at every public boundary.
The contact point sits on the fingertip arc at distance ``d1`` from the
revolute joint; the arc radius only guarantees flat-surface contact and is
not used kinematically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from hybridgrip.errors import DomainError

# bisection bracket shrinks by 2 per step; 200 steps is far below double eps
_MAX_BISECT = 200
# the residual alone is a loose stop where the drop curve is flat (beta, alpha near 0)
_ANGLE_TOL = 1e-10  # deg


@dataclass(frozen=True)
class FingertipGeometry:
    """Rigid-link constants of one finger."""

    r_c: float = 20.0  # fingertip contact-arc radius (mm)
    d1: float = 31.0  # joint-to-contact length (mm)
    beta: float = 20.64  # built-in fingertip offset (deg)
    alpha_max: float = 80.0  # joint deflection limit (deg)
    a1: float = 50.0  # testing-fingertip lever (mm)

    def __post_init__(self):
        if not (self.r_c > 0 and self.d1 > 0 and self.a1 > 0):
            raise DomainError("r_c, d1 and a1 must be positive")
        if not 0 <= self.beta < 90:
            raise DomainError(f"beta={self.beta} deg outside [0, 90)")
        if not 0 < self.alpha_max <= 80:
            raise DomainError(f"alpha_max={self.alpha_max} deg outside (0, 80]")
        if self.beta + self.alpha_max > 110:
            raise DomainError("beta + alpha_max must not exceed 110 deg")

    def check_alpha(self, alpha: float) -> None:
        if not (0.0 <= alpha <= self.alpha_max) or math.isnan(alpha):
            raise DomainError(
                f"alpha={alpha} deg outside [0, {self.alpha_max}]"
            )


@dataclass(frozen=True)
class FingerPose:
    alpha: float  # distal-joint backward bend (deg)
    d_f: float  # finger-body separation (mm)
    descent: float = 0.0  # gripper descent from first contact (mm)

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"alpha={self.alpha} deg is negative")
        if not 0 <= self.d_f <= 100:
            raise DomainError(f"d_f={self.d_f} mm outside [0, 100]")
        if self.descent < 0:
            raise DomainError(f"descent={self.descent} mm is negative")


def testing_fingertip_drop(alpha: float, geom: FingertipGeometry) -> float:
    """Vertical travel H of the straight testing fingertip bent by ``alpha``."""
    geom.check_alpha(alpha)
    return geom.a1 * (1.0 - math.cos(math.radians(alpha)))


def finger_drop(alpha: float, geom: FingertipGeometry) -> float:
    """Gripper descent h that bends the working fingertip by ``alpha``."""
    geom.check_alpha(alpha)
    beta = math.radians(geom.beta)
    return geom.d1 * (math.cos(beta) - math.cos(beta + math.radians(alpha)))


def drop_to_angle(h: float, geom: FingertipGeometry, tol: float = 1e-9) -> float:
    """Invert :func:`finger_drop` by bisection on ``[0, alpha_max]``.

    Stops once the drop residual is below ``tol`` mm and the angle bracket
    is narrower than 1e-10 deg.
    """
    h_max = finger_drop(geom.alpha_max, geom)
    if not (0.0 <= h <= h_max):
        raise DomainError(f"h={h} mm outside reachable range [0, {h_max:.6g}]")
    lo, hi = 0.0, geom.alpha_max
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        resid = finger_drop(mid, geom) - h
        if (abs(resid) < tol and hi - lo < _ANGLE_TOL) or hi - lo < 1e-13:
            break
        if resid < 0:
            lo = mid
        else:
            hi = mid
    return mid


def extension(alpha: float, geom: FingertipGeometry) -> float:
    """Horizontal reach d_e of the contact point beyond the finger-body axis."""
    geom.check_alpha(alpha)
    return geom.d1 * math.sin(math.radians(geom.beta + alpha))


def contact_span(pose: FingerPose, geom: FingertipGeometry) -> float:
    """Distance between the two fingertip contact points."""
    return pose.d_f + 2.0 * extension(pose.alpha, geom)


def contact_point(alpha: float, geom: FingertipGeometry) -> tuple[float, float]:
    """(y, z) of the contact point relative to the joint, z pointing up."""
    geom.check_alpha(alpha)
    phi = math.radians(geom.beta + alpha)
    return geom.d1 * math.sin(phi), -geom.d1 * math.cos(phi)


def separation_for_span(span: float, alpha: float, geom: FingertipGeometry) -> float:
    """Finger separation d_f that yields contact span ``span`` at ``alpha``."""
    d_f = span - 2.0 * extension(alpha, geom)
    if not 0 <= d_f <= 100:
        raise DomainError(
            f"span {span} mm at alpha={alpha} deg needs d_f={d_f:.3f} mm"
        )
    return d_f
