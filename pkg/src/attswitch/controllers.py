"""Attitude error, torque laws, and the hysteretic switching logic.

Three torque laws are provided, all with the same feedback-linearization
structure J(...) + w x Jw so the closed-loop error dynamics are independent
of the inertia matrix:

  * continuous:  J(kq n_e + kw w_e + wdot_d) + w x Jw
  * benchmark:   same with the proportional term multiplied by sgn(m_e),
                 i.e. always torquing along the shorter rotational path
  * switching:   J(s kq n_e + kw nu + wdot_d + s kn n_e_dot) + w x Jw with
                 nu = w_e + s kn n_e and s in {+1, -1} picked by a
                 Lyapunov-difference switching function with hysteresis

The switching signal s selects which of the two antipodal closed-loop
equilibria is stabilized; it is updated once per control step from the
switching function value Lambda with a dead band of width 2*delta.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .quat import quat_inverse, quat_mul
from .reference import ManeuverTracker, ReferenceSample
from .rigid_body import BodyState


@dataclass
class GainSet:
    """Controller and Lyapunov parameters.

    kq, kw, kn are the proportional, rate, and composite-error gains; c
    weights the attitude term of the Lyapunov function (and sets the
    certified-region radius 4c); delta is the switching hysteresis margin.
    All must be positive.  Stability certification additionally needs
    c < 4 kn kw / kq, which is only warned about because the torque laws
    themselves remain well defined without it.
    """

    kq: float
    kw: float
    kn: float
    c: float
    delta: float = 0.1

    def __post_init__(self):
        for name in ("kq", "kw", "kn", "c", "delta"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"gain {name} must be positive and finite, got {v}")
            setattr(self, name, v)
        if self.c >= self.c_max():
            warnings.warn(
                f"c = {self.c} is not below 4*kn*kw/kq = {self.c_max()}; "
                "the decrease certificate will not hold",
                stacklevel=2,
            )

    def c_max(self) -> float:
        return 4.0 * self.kn * self.kw / self.kq


@dataclass
class ErrorState:
    """Attitude-error quaternion and angular-velocity error.

    ``nu`` is filled in by the switching controller for the active switch
    sign; plain error computation leaves it None.
    """

    q_err: np.ndarray  # (4,) error quaternion, never sign-normalized
    w_err: np.ndarray  # (3,) rad/s
    nu: np.ndarray | None = None

    @property
    def m_e(self) -> float:
        return float(self.q_err[0])

    @property
    def n_e(self) -> np.ndarray:
        return self.q_err[1:]


@dataclass(frozen=True)
class SwitchState:
    sigma: int = +1
    last_lambda: float = 0.0
    switch_count: int = 0
    switch_times: tuple = ()


def attitude_error(q: np.ndarray, q_d: np.ndarray, w: np.ndarray, w_d: np.ndarray) -> ErrorState:
    """Error state: q_err = q^-1 * q_d, w_err = w_d - w (no sign flip)."""
    return ErrorState(q_err=quat_mul(quat_inverse(q), q_d), w_err=w_d - w)


def nu_sigma(err: ErrorState, sigma: int, gains: GainSet) -> np.ndarray:
    """Composite error w_err + sigma * kn * n_e for the given switch sign."""
    return err.w_err + (sigma * gains.kn) * err.n_e


def error_vector_rate(err: ErrorState) -> np.ndarray:
    """Analytic rate of the error-quaternion vector part.

    This is the vector part of 0.5 * [0, w_err] * q_err, exact for a
    piecewise-constant reference; using it instead of a numerical
    difference keeps the switching law noise-free.
    """
    m = err.q_err[0]
    nx, ny, nz = err.q_err[1], err.q_err[2], err.q_err[3]
    wx, wy, wz = err.w_err
    return 0.5 * np.array(
        [
            m * wx + wy * nz - wz * ny,
            m * wy + wz * nx - wx * nz,
            m * wz + wx * ny - wy * nx,
        ]
    )


def _gyro(w: np.ndarray, J: np.ndarray) -> np.ndarray:
    Jw = J @ w
    return np.array(
        [
            w[1] * Jw[2] - w[2] * Jw[1],
            w[2] * Jw[0] - w[0] * Jw[2],
            w[0] * Jw[1] - w[1] * Jw[0],
        ]
    )


def continuous_torque(
    err: ErrorState, w: np.ndarray, wdot_d: np.ndarray, gains: GainSet, J: np.ndarray
) -> np.ndarray:
    return J @ (gains.kq * err.n_e + gains.kw * err.w_err + wdot_d) + _gyro(w, J)


def benchmark_torque(
    err: ErrorState, w: np.ndarray, wdot_d: np.ndarray, gains: GainSet, J: np.ndarray
) -> np.ndarray:
    # sgn(0) is defined as +1; m_e = 0 is a measure-zero tie
    s = 1.0 if err.m_e >= 0.0 else -1.0
    return J @ ((s * gains.kq) * err.n_e + gains.kw * err.w_err + wdot_d) + _gyro(w, J)


def switching_torque(
    err: ErrorState,
    sigma: int,
    w: np.ndarray,
    wdot_d: np.ndarray,
    gains: GainSet,
    J: np.ndarray,
) -> np.ndarray:
    nu = nu_sigma(err, sigma, gains)
    ndot = error_vector_rate(err)
    return (
        J @ ((sigma * gains.kq) * err.n_e + gains.kw * nu + wdot_d + (sigma * gains.kn) * ndot)
        + _gyro(w, J)
    )


def switch_function(err: ErrorState, gains: GainSet) -> float:
    """Lyapunov difference Lambda = V(-1) - V(+1) in closed form."""
    w_err = err.w_err
    q = err.q_err
    dot = w_err[0] * q[1] + w_err[1] * q[2] + w_err[2] * q[3]
    return -2.0 * gains.kn / gains.kq * dot + 4.0 * gains.c * err.m_e


def update_sigma(
    state: SwitchState, lam: float, delta: float, t: float | None = None
) -> SwitchState:
    """Hysteretic update of the switch sign.

    Holds the current sign inside the dead band (-delta, delta), selects +1
    for lam >= delta and -1 for lam <= -delta.  A sign change increments the
    switch count and records t when provided.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if lam >= delta:
        new = +1
    elif lam <= -delta:
        new = -1
    else:
        new = state.sigma
    if new != state.sigma:
        times = state.switch_times + (t,) if t is not None else state.switch_times
        return SwitchState(
            sigma=new,
            last_lambda=lam,
            switch_count=state.switch_count + 1,
            switch_times=times,
        )
    return replace(state, last_lambda=lam)


@dataclass
class ControlTelemetry:
    m_e: float
    n_e: np.ndarray
    w_err: np.ndarray
    sigma: int
    lam: float


class _ControllerBase:
    """Shared plumbing: reference tracking and yaw unwrapping."""

    def __init__(self, gains: GainSet, J: np.ndarray, tracker: ManeuverTracker):
        self.gains = gains
        self.J = np.asarray(J, dtype=float)
        self.tracker = tracker
        self._prev_yaw = None
        self._yaw_accum = 0.0

    def _unwrapped_yaw(self, q: np.ndarray) -> float:
        w, x, y, z = q
        yaw = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
        if self._prev_yaw is None:
            self._yaw_accum = yaw
        else:
            d = yaw - self._prev_yaw
            if d > math.pi:
                d -= 2.0 * math.pi
            elif d < -math.pi:
                d += 2.0 * math.pi
            self._yaw_accum += d
        self._prev_yaw = yaw
        return self._yaw_accum

    def _reference(self, t: float, state: BodyState) -> ReferenceSample:
        return self.tracker.sample(t, self._unwrapped_yaw(state.q))


class ContinuousController(_ControllerBase):
    def __call__(self, t: float, state: BodyState):
        ref = self._reference(t, state)
        err = attitude_error(state.q, ref.q_d, state.w, ref.w_d)
        tau = continuous_torque(err, state.w, ref.wdot_d, self.gains, self.J)
        lam = switch_function(err, self.gains)
        return tau, ControlTelemetry(err.m_e, err.n_e, err.w_err, +1, lam)


class BenchmarkController(_ControllerBase):
    """Stateless shorter-path law; its effective sign is re-read every step."""

    def __call__(self, t: float, state: BodyState):
        ref = self._reference(t, state)
        err = attitude_error(state.q, ref.q_d, state.w, ref.w_d)
        tau = benchmark_torque(err, state.w, ref.wdot_d, self.gains, self.J)
        lam = switch_function(err, self.gains)
        sigma = +1 if err.m_e >= 0.0 else -1
        return tau, ControlTelemetry(err.m_e, err.n_e, err.w_err, sigma, lam)


class SwitchingController(_ControllerBase):
    """Hysteretic Lyapunov-based switching law; owns the switch state."""

    def __init__(self, gains: GainSet, J: np.ndarray, tracker: ManeuverTracker):
        super().__init__(gains, J, tracker)
        self.switch_state = SwitchState(sigma=+1)

    def __call__(self, t: float, state: BodyState):
        ref = self._reference(t, state)
        err = attitude_error(state.q, ref.q_d, state.w, ref.w_d)
        lam = switch_function(err, self.gains)
        self.switch_state = update_sigma(self.switch_state, lam, self.gains.delta, t)
        sigma = self.switch_state.sigma
        err.nu = nu_sigma(err, sigma, self.gains)
        tau = switching_torque(err, sigma, state.w, ref.wdot_d, self.gains, self.J)
        return tau, ControlTelemetry(err.m_e, err.n_e, err.w_err, sigma, lam)
