"""Quasi-static simulation of a single grasp trial.

A trial runs in three phases:

press
    The fingers push on the sheet with a commanded normal load ``N1``.  In
    hybrid mode the fingertip rotates backward until the ring torque balances
    the moment of ``N1`` about the joint (or stays at ``alpha0`` when the ring
    is stiff enough).  A joint that had to give way past ``alpha0`` is
    *yielded*: it has no torque reserve and cannot transmit a closing force.
    A joint that folds all the way to the hard stop is *saturated*; the pad
    then only carries what the ring torque supports and the rest of the press
    goes through the finger body.
close
    The fingers close in increments of at most ``step`` mm.  The tip has to
    push the sheet end against the (imperfection-reduced) Euler load plus
    the drag of the sheet pressed onto the base.  If it cannot, the pad
    slides (``tip_slip``).  Otherwise the sheet buckles upward and the buckle
    grows with closure while the base drag decays.
lift
    The press load is released.  In hybrid mode the ring rotates the
    fingertip back until its torque balances the sheet's compressive
    reaction, moving both contact points inward; that spring-back adds to
    the end-shortening.  The sheet is lifted when its rise reaches
    ``lift_rise`` and the pinch can carry its weight.

Sign convention for tangential forces: ``ff1`` is the force of the pad on
the sheet, positive toward the gripper centre; ``ff2`` is the force of the
base on the sheet.  During ``lift`` states the pad pinches the sheet end and
``ff1`` is the vertical support it provides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Union

from scipy.optimize import brentq

from hybridgrip import geometry as geo
from hybridgrip.errors import DomainError, EngineError, InfeasibleError
from hybridgrip.geometry import FingertipGeometry
from hybridgrip.joint import JointStiffnessModel, ring_torque
from hybridgrip.sheet import (
    GRAVITY,
    SheetSpec,
    buckle_amplitude,
    effective_buckling_load,
    shortening_for_amplitude,
)

Mode = Literal["hybrid", "rigid"]
FailureMode = Literal["none", "tip_slip", "no_buckle", "hold_failure"]

CONE_TOL = 1e-9
DEFAULT_STEP = 0.1  # mm
DEFAULT_LIFT_RISE = 29.5  # mm
DEFAULT_OBJECT_ALPHA = 5.0  # deg


@dataclass(frozen=True)
class ContactParams:
    mu_tip: float = 0.9  # silicone pad on the object
    mu_surface: float = 0.3  # object on the base

    def __post_init__(self):
        for name in ("mu_tip", "mu_surface"):
            v = getattr(self, name)
            if not 0 <= v <= 2:
                raise DomainError(f"{name}={v} outside [0, 2]")


@dataclass(frozen=True)
class RigidObjectSpec:
    mass: float  # kg
    grasp_height: float = 20.0  # mm
    edge_factor: float = 1.0  # share of the pad friction usable on this object
    contact_mu_override: Optional[float] = None
    contact_alpha: Optional[float] = None  # deg; engine default when None
    name: str = "object"

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError("object mass must be positive")
        if not 0 < self.edge_factor <= 1:
            raise DomainError(f"edge_factor={self.edge_factor} outside (0, 1]")
        if self.contact_mu_override is not None and not 0 <= self.contact_mu_override <= 2:
            raise DomainError("contact_mu_override outside [0, 2]")


@dataclass(frozen=True)
class GraspScenario:
    """One grasp experiment.

    In rigid mode ``alpha0`` is the angle at which the fingertip is locked
    and ``pressure`` is ignored.
    """

    mode: Mode
    alpha0: float  # deg
    pressure: float  # kPa
    d_f0: float  # mm
    close_by: float  # mm
    press_force: float  # N, per finger
    sheet_or_object: Union[SheetSpec, RigidObjectSpec] = field(default_factory=SheetSpec)

    def __post_init__(self):
        if self.mode not in ("hybrid", "rigid"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "hybrid" and not self.alpha0 > 0:
            raise DomainError("hybrid mode needs alpha0 > 0")
        if self.alpha0 < 0:
            raise DomainError("alpha0 must be nonnegative")
        if not self.press_force > 0:
            raise DomainError("press_force must be positive")
        if self.close_by < 0:
            raise DomainError("close_by must be nonnegative")
        if self.pressure < 0:
            raise DomainError("pressure must be nonnegative")
        if not 0 <= self.d_f0 <= 100:
            raise DomainError(f"d_f0={self.d_f0} mm outside [0, 100]")


@dataclass(frozen=True)
class ForceState:
    n1: float  # pad normal on the object (N)
    ff1: float  # pad tangential on the object (N)
    n2: float  # base normal on the object (N)
    ff2: float  # base tangential on the object (N)
    alpha: float  # joint angle (deg)
    w: float  # buckle rise (mm)
    closure: float = 0.0  # commanded closure so far (mm)
    phase: str = "press"


@dataclass(frozen=True)
class PressResult:
    state: ForceState
    yielded: bool
    saturated: bool
    span: float  # contact span after the press (mm)


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    failure_mode: FailureMode
    closure_used: float
    force_trace: tuple[ForceState, ...]
    springback_contribution: float
    alpha_settled: float = 0.0
    alpha_final: float = 0.0
    end_shortening: float = 0.0

    def __post_init__(self):
        if self.success != (self.failure_mode == "none"):
            raise EngineError("success must coincide with failure_mode == 'none'")


@dataclass(frozen=True)
class EngineSettings:
    step: float = DEFAULT_STEP  # closure increment (mm)
    lift_rise: float = DEFAULT_LIFT_RISE  # buckle rise at which the sheet lifts (mm)
    object_alpha: float = DEFAULT_OBJECT_ALPHA  # default wedge angle for rigid objects (deg)
    record_trace: bool = True

    def __post_init__(self):
        if not 0 < self.step <= 0.1:
            raise DomainError("closure step must be in (0, 0.1] mm")
        if not self.lift_rise > 0:
            raise DomainError("lift_rise must be positive")


DEFAULT_SETTINGS = EngineSettings()


def _sheet(scenario: GraspScenario) -> SheetSpec:
    sheet = scenario.sheet_or_object
    if not isinstance(sheet, SheetSpec):
        raise EngineError("sheet trial requires a SheetSpec")
    return sheet


def _normal_lever(alpha, geom):
    return geom.d1 * math.sin(math.radians(geom.beta + alpha))


def _tangential_lever(alpha, geom):
    return geom.d1 * math.cos(math.radians(geom.beta + alpha))


def press_phase(
    scenario: GraspScenario,
    geom: FingertipGeometry,
    joint_model: Optional[JointStiffnessModel],
    contact: ContactParams,
) -> PressResult:
    """Settle the fingertip under the commanded press load."""
    sheet = _sheet(scenario)
    n_press = scenario.press_force
    yielded = saturated = False
    if scenario.mode == "rigid":
        geom.check_alpha(scenario.alpha0)
        alpha, n1 = scenario.alpha0, n_press
    else:
        if joint_model is None:
            raise EngineError("hybrid mode requires a joint model")
        geom.check_alpha(scenario.alpha0)
        p = scenario.pressure

        def excess(a):
            return ring_torque(joint_model, a, p) - n_press * _normal_lever(a, geom)

        alpha, n1 = scenario.alpha0, n_press
        if excess(scenario.alpha0) < 0:
            yielded = True
            if excess(geom.alpha_max) >= 0:
                alpha = brentq(excess, scenario.alpha0, geom.alpha_max, xtol=1e-12)
            else:
                saturated = True
                alpha = geom.alpha_max
                n1 = ring_torque(joint_model, alpha, p) / _normal_lever(alpha, geom)
    n2 = sheet.weight + 2.0 * n_press
    span = scenario.d_f0 + 2.0 * geo.extension(alpha, geom)
    state = ForceState(n1, 0.0, n2, 0.0, alpha, sheet.initial_deflection)
    return PressResult(state, yielded, saturated, span)


def _release_angle(joint_model, pressure, alpha_s, load, geom):
    """Angle the fingertip springs back to under the sheet's end load."""

    def excess(a):
        return ring_torque(joint_model, a, pressure) - load * _tangential_lever(a, geom)

    if excess(alpha_s) <= 0:
        return alpha_s
    if excess(0.0) >= 0:
        return 0.0
    return brentq(excess, 0.0, alpha_s, xtol=1e-12)


def hold_check(w: float, n_grip: float, sheet, contact: ContactParams) -> bool:
    """True when two pads squeezing with ``n_grip`` carry the sheet's weight."""
    if w < 0 or n_grip < 0:
        raise DomainError("w and n_grip must be nonnegative")
    weight = sheet.weight if isinstance(sheet, SheetSpec) else sheet.mass * GRAVITY
    return 2.0 * contact.mu_tip * n_grip >= weight


def close_phase(
    press: PressResult,
    scenario: GraspScenario,
    geom: FingertipGeometry,
    joint_model: Optional[JointStiffnessModel],
    sheet: SheetSpec,
    contact: ContactParams,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> TrialOutcome:
    """Close the fingers, buckle the sheet and try to lift it."""
    state0 = press.state
    if scenario.close_by > scenario.d_f0 + 1e-9:
        raise DomainError(
            f"close_by={scenario.close_by} mm exceeds the finger gap {scenario.d_f0} mm"
        )
    trace = [state0] if settings.record_trace else []
    d0 = press.span
    alpha_s = state0.alpha
    n1 = state0.n1
    n2_0 = state0.n2
    mu_s = contact.mu_surface
    p_eff = effective_buckling_load(sheet, d0)
    w_lift = settings.lift_rise
    c_lift = shortening_for_amplitude(d0, w_lift)
    c_cap = d0 * (1.0 - 1e-9)

    friction_cap = contact.mu_tip * n1
    joint_cap = math.inf
    if scenario.mode == "hybrid":
        if press.yielded:
            joint_cap = 0.0
        else:
            reserve = ring_torque(joint_model, alpha_s, scenario.pressure) - n1 * _normal_lever(alpha_s, geom)
            lever = _tangential_lever(alpha_s, geom)
            if lever > 1e-12:
                joint_cap = max(reserve, 0.0) / lever
    cap = min(friction_cap, joint_cap)

    def outcome(mode, closure, springback=0.0, alpha_final=alpha_s, shortening=0.0):
        return TrialOutcome(
            success=mode == "none",
            failure_mode=mode,
            closure_used=closure,
            force_trace=tuple(trace),
            springback_contribution=springback,
            alpha_settled=alpha_s,
            alpha_final=alpha_final,
            end_shortening=shortening,
        )

    step = settings.step
    n_steps = math.ceil(scenario.close_by / step - 1e-9)
    if n_steps == 0:
        return outcome("no_buckle", 0.0)

    def base_state(w):
        # the rising sheet unloads the base linearly until it lifts
        return n2_0 * max(0.0, 1.0 - w / w_lift)

    drag0 = mu_s * n2_0 / 2.0
    if cap < p_eff + drag0:
        # pad cannot drive the sheet end: it yields or slides over the sheet
        ff1 = cap
        ff2 = -min(ff1, drag0)
        if settings.record_trace:
            for k in range(1, n_steps + 1):
                u = min(k * step, scenario.close_by)
                trace.append(ForceState(n1, ff1, n2_0, 2.0 * ff2, alpha_s, state0.w, u, "close"))
        return outcome("tip_slip", scenario.close_by)

    # buckled: the sheet ends move with the pads
    u = 0.0
    w = state0.w
    for k in range(1, n_steps + 1):
        u = min(k * step, scenario.close_by)
        w = max(state0.w, buckle_amplitude(d0, min(u, c_cap)))
        n2 = base_state(w)
        if settings.record_trace:
            drag = mu_s * n2 / 2.0
            trace.append(ForceState(n1, p_eff + drag, n2, -2.0 * drag, alpha_s, w, u, "close"))
        if w >= w_lift:
            break
    closure = u

    springback = 0.0
    alpha_f = alpha_s
    if scenario.mode == "hybrid":
        alpha_f = _release_angle(joint_model, scenario.pressure, alpha_s, p_eff, geom)
        springback = 2.0 * (geo.extension(alpha_s, geom) - geo.extension(alpha_f, geom))
    shortening = closure + springback

    if settings.record_trace and alpha_f < alpha_s:
        n_sub = max(1, math.ceil(springback / step - 1e-9))
        ext_s = geo.extension(alpha_s, geom)
        for j in range(1, n_sub + 1):
            a = alpha_s + (alpha_f - alpha_s) * j / n_sub
            c = closure + 2.0 * (ext_s - geo.extension(a, geom))
            wj = max(state0.w, buckle_amplitude(d0, min(c, c_cap)))
            n2 = base_state(wj)
            drag = mu_s * n2 / 2.0
            # pad now pushes the sheet end inward with its normal force
            trace.append(ForceState(p_eff + drag, 0.0, n2, -2.0 * drag, a, wj, closure, "lift"))

    if shortening < c_lift:
        return outcome("no_buckle", closure, springback, alpha_f, shortening)
    w_final = buckle_amplitude(d0, min(shortening, c_cap))
    n_grip = p_eff
    held = hold_check(w_final, n_grip, sheet, contact)
    if settings.record_trace:
        support = sheet.weight / 2.0
        if not held:
            support = contact.mu_tip * n_grip
        trace.append(ForceState(n_grip, support, 0.0, 0.0, alpha_f, w_final, closure, "lift"))
    if not held:
        return outcome("hold_failure", closure, springback, alpha_f, shortening)
    return outcome("none", closure, springback, alpha_f, shortening)


def run_trial(
    scenario: GraspScenario,
    geom: FingertipGeometry,
    joint_model: Optional[JointStiffnessModel],
    contact: ContactParams,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> TrialOutcome:
    """Press, close and lift; deterministic for fixed inputs."""
    if isinstance(scenario.sheet_or_object, RigidObjectSpec):
        return grasp_rigid_object(
            scenario.sheet_or_object, scenario.pressure, geom, joint_model, contact, settings
        )
    press = press_phase(scenario, geom, joint_model, contact)
    return close_phase(press, scenario, geom, joint_model, _sheet(scenario), contact, settings)


def min_closure_for_success(
    scenario: GraspScenario,
    geom: FingertipGeometry,
    joint_model: Optional[JointStiffnessModel],
    contact: ContactParams,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> float:
    """Smallest closure (multiple of the step) at which the trial succeeds."""
    quiet = replace(settings, record_trace=False)
    step = settings.step
    hi = math.floor(scenario.d_f0 / step + 1e-9)

    def ok(k):
        sc = replace(scenario, close_by=k * step)
        return run_trial(sc, geom, joint_model, contact, quiet).success

    if hi < 1 or not ok(hi):
        raise InfeasibleError(
            f"no success within the available closure of {scenario.d_f0:.3f} mm"
        )
    lo = 0  # close_by = 0 never buckles the sheet
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi * step


def grasp_rigid_object(
    obj: RigidObjectSpec,
    pressure: float,
    geom: FingertipGeometry,
    joint_model: JointStiffnessModel,
    contact: ContactParams,
    settings: EngineSettings = DEFAULT_SETTINGS,
) -> TrialOutcome:
    """Squeeze-and-lift check for a compact rigid object.

    The object wedges the fingertip back to ``contact_alpha``; the ring
    torque there sets the squeeze, and the usable friction is derated by the
    object's edge factor.
    """
    alpha_c = obj.contact_alpha if obj.contact_alpha is not None else settings.object_alpha
    geom.check_alpha(alpha_c)
    lever = _tangential_lever(alpha_c, geom)
    if lever <= 1e-12:
        raise DomainError("contact angle leaves no lever for the squeeze")
    n_grip = ring_torque(joint_model, alpha_c, pressure) / lever
    mu = obj.contact_mu_override if obj.contact_mu_override is not None else contact.mu_tip
    usable = mu * obj.edge_factor
    weight = obj.mass * GRAVITY
    held = 2.0 * usable * n_grip >= weight
    support = min(weight / 2.0, usable * n_grip)
    trace = (ForceState(n_grip, support, 0.0, 0.0, alpha_c, 0.0, 0.0, "lift"),)
    return TrialOutcome(
        success=held,
        failure_mode="none" if held else "hold_failure",
        closure_used=0.0,
        force_trace=trace if settings.record_trace else (),
        springback_contribution=0.0,
        alpha_settled=alpha_c,
        alpha_final=alpha_c,
    )
