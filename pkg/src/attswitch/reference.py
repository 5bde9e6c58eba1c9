"""Desired-attitude references for the three-stage yaw maneuver.

Stage 1 holds an identity (hover) reference, stage 2 spins the desired frame
about the body yaw axis at a constant rate until the measured yaw reaches the
target angle, and stage 3 snaps the reference back to identity as an ideal
step.  The stage-2 quaternion is obtained by integrating the constant rate
from identity, which keeps it kinematically consistent and lets its scalar
part go negative for targets beyond pi (no shortest-path flip).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .rigid_body import BodyState

MODE_FULL = "full"
MODE_STAGE3 = "stage3"


@dataclass
class ManeuverSpec:
    """Yaw-maneuver definition.

    w0 is the stage-2 angular-velocity reference (rad/s, nominally along the
    yaw axis), psi0 the stage-2 terminal yaw in rad, and mode selects either
    the full three-stage profile or a direct start at the stage-3 initial
    condition.
    """

    w0: np.ndarray
    psi0: float
    stage1_duration: float = 1.0
    mode: str = MODE_FULL

    def __post_init__(self):
        self.w0 = np.asarray(self.w0, dtype=float)
        if self.w0.shape != (3,) or not np.all(np.isfinite(self.w0)):
            raise ValueError("w0 must be a finite 3-vector")
        if not 0.0 < self.psi0 < 2.0 * math.pi:
            raise ValueError(f"psi0 must lie in (0, 2*pi), got {self.psi0}")
        if self.stage1_duration < 0.0:
            raise ValueError("stage1_duration must be non-negative")
        if self.mode not in (MODE_FULL, MODE_STAGE3):
            raise ValueError(f"unknown maneuver mode {self.mode!r}")


@dataclass
class ReferenceSample:
    q_d: np.ndarray   # (4,) desired attitude
    w_d: np.ndarray   # (3,) rad/s, desired body rate
    wdot_d: np.ndarray  # (3,) rad/s^2, feedforward


_ZERO3 = np.zeros(3)


def reference_at(spec: ManeuverSpec, t: float, t0: float | None = None) -> ReferenceSample:
    """Reference sample at time t, given the stage-3 start time t0.

    ``t0 = None`` means the stage-2 -> stage-3 transition has not happened
    yet (full mode while still spinning up); in stage3 mode callers pass
    t0 = 0.  The stage-3 feedforward at the step instant is defined as zero,
    treating the reference change as an ideal discontinuity.
    """
    if t0 is not None and t >= t0:
        return ReferenceSample(quat.IDENTITY.copy(), _ZERO3.copy(), _ZERO3.copy())
    if t < spec.stage1_duration:
        return ReferenceSample(quat.IDENTITY.copy(), _ZERO3.copy(), _ZERO3.copy())
    rate = math.sqrt(float(spec.w0 @ spec.w0))
    if rate < 1e-15:
        return ReferenceSample(quat.IDENTITY.copy(), _ZERO3.copy(), _ZERO3.copy())
    angle = rate * (t - spec.stage1_duration)
    axis = spec.w0 / rate
    h = 0.5 * angle
    s = math.sin(h)
    q_d = np.array([math.cos(h), axis[0] * s, axis[1] * s, axis[2] * s])
    return ReferenceSample(q_d, spec.w0.copy(), _ZERO3.copy())


def stage3_initial_state(spec: ManeuverSpec) -> BodyState:
    """Body state at the stage-3 step for a direct (stage3-mode) start.

    The attitude is the continuously accumulated yaw rotation, so for
    psi0 > pi the quaternion scalar part is negative by construction.
    """
    h = 0.5 * spec.psi0
    q = np.array([math.cos(h), 0.0, 0.0, math.sin(h)])
    return BodyState(q=q, w=spec.w0.copy())


@dataclass
class ManeuverTracker:
    """Stateful wrapper that pins the stage-3 transition during a run.

    Full mode: ``sample`` arms the transition the first time the measured
    (unwrapped) yaw reaches psi0 while in stage 2.  Stage3 mode starts with
    t0 = 0 so every query is already in stage 3.
    """

    spec: ManeuverSpec
    t0: float | None = field(init=False)

    def __post_init__(self):
        self.t0 = 0.0 if self.spec.mode == MODE_STAGE3 else None

    def sample(self, t: float, measured_yaw: float | None = None) -> ReferenceSample:
        if (
            self.t0 is None
            and measured_yaw is not None
            and t >= self.spec.stage1_duration
            and measured_yaw >= self.spec.psi0
        ):
            self.t0 = t
        return reference_at(self.spec, t, self.t0)
