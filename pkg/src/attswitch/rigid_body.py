"""Torque-driven rigid-body attitude dynamics and fixed-step integration.

The open-loop model is the standard one: quaternion kinematics driven by the
body angular velocity, and Euler's equation for the angular acceleration,

    q_dot = 0.5 * q * [0, w]
    w_dot = Jinv (tau - w x J w)

integrated with classical fixed-step RK4 while holding the commanded torque
constant over each step.  The quaternion is renormalized (sign-preserving)
after each step only when its norm has drifted.
"""

import math
from dataclasses import dataclass

import numpy as np

from .quat import NORM_DRIFT_TOL, quat_kinematics

DEFAULT_INERTIA = np.diag([1.66e-5, 1.66e-5, 2.93e-5])  # kg m^2, 31-g quadrotor scale
DEFAULT_DT = 1e-3


class SimulationError(RuntimeError):
    """Raised when integration or a controller fails mid-run."""


def validate_inertia(J: np.ndarray) -> np.ndarray:
    """Check that J is a finite, symmetric, positive-definite 3x3 matrix.

    Positive definiteness is established through the leading principal
    minors (Sylvester's criterion).  Returns J as a float array.
    """
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3):
        raise ValueError(f"inertia matrix must be 3x3, got shape {J.shape}")
    if not np.all(np.isfinite(J)):
        raise ValueError("inertia matrix must be finite")
    if not np.allclose(J, J.T, rtol=0.0, atol=1e-12):
        raise ValueError("inertia matrix must be symmetric (tol 1e-12)")
    m1 = J[0, 0]
    m2 = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    m3 = np.linalg.det(J)
    if not (m1 > 0.0 and m2 > 0.0 and m3 > 0.0):
        raise ValueError(f"inertia matrix must be positive definite, minors = ({m1}, {m2}, {m3})")
    return J


@dataclass
class BodyState:
    """Attitude quaternion (body w.r.t. inertial) and body-frame angular velocity."""

    q: np.ndarray  # (4,) scalar-first unit quaternion
    w: np.ndarray  # (3,) rad/s


def open_loop_derivative(state: BodyState, tau: np.ndarray, J: np.ndarray):
    """State derivative (q_dot, w_dot) for torque tau."""
    qdot = quat_kinematics(state.q, state.w)
    w = state.w
    Jw = J @ w
    gyro = np.array(
        [
            w[1] * Jw[2] - w[2] * Jw[1],
            w[2] * Jw[0] - w[0] * Jw[2],
            w[0] * Jw[1] - w[1] * Jw[0],
        ]
    )
    wdot = np.linalg.solve(J, tau - gyro)
    return qdot, wdot


def _deriv7(y, tx, ty, tz, J, Jinv):
    """Packed derivative of (q, w) as plain floats; tau held constant."""
    qw, qx, qy, qz, wx, wy, wz = y
    jx = J[0][0] * wx + J[0][1] * wy + J[0][2] * wz
    jy = J[1][0] * wx + J[1][1] * wy + J[1][2] * wz
    jz = J[2][0] * wx + J[2][1] * wy + J[2][2] * wz
    rx = tx - (wy * jz - wz * jy)
    ry = ty - (wz * jx - wx * jz)
    rz = tz - (wx * jy - wy * jx)
    return (
        0.5 * (-qx * wx - qy * wy - qz * wz),
        0.5 * (qw * wx + qy * wz - qz * wy),
        0.5 * (qw * wy - qx * wz + qz * wx),
        0.5 * (qw * wz + qx * wy - qy * wx),
        Jinv[0][0] * rx + Jinv[0][1] * ry + Jinv[0][2] * rz,
        Jinv[1][0] * rx + Jinv[1][1] * ry + Jinv[1][2] * rz,
        Jinv[2][0] * rx + Jinv[2][1] * ry + Jinv[2][2] * rz,
    )


def _rk4_core(y, tx, ty, tz, J, Jinv, dt):
    k1 = _deriv7(y, tx, ty, tz, J, Jinv)
    h = 0.5 * dt
    y2 = tuple(y[i] + h * k1[i] for i in range(7))
    k2 = _deriv7(y2, tx, ty, tz, J, Jinv)
    y3 = tuple(y[i] + h * k2[i] for i in range(7))
    k3 = _deriv7(y3, tx, ty, tz, J, Jinv)
    y4 = tuple(y[i] + dt * k3[i] for i in range(7))
    k4 = _deriv7(y4, tx, ty, tz, J, Jinv)
    s = dt / 6.0
    y = tuple(y[i] + s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(7))
    qw, qx, qy, qz, wx, wy, wz = y
    nn = qw * qw + qx * qx + qy * qy + qz * qz
    if abs(nn - 1.0) > NORM_DRIFT_TOL:
        r = 1.0 / math.sqrt(nn)
        qw, qx, qy, qz = qw * r, qx * r, qy * r, qz * r
    return qw, qx, qy, qz, wx, wy, wz


def rk4_step(state: BodyState, tau: np.ndarray, J: np.ndarray, dt: float) -> BodyState:
    """One RK4 step of the open-loop dynamics with tau held constant."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    Jm = np.asarray(J, dtype=float)
    y = _rk4_core(
        (*state.q, *state.w), tau[0], tau[1], tau[2], Jm.tolist(), np.linalg.inv(Jm).tolist(), dt
    )
    if not all(math.isfinite(v) for v in y):
        raise SimulationError(f"non-finite state after step: q={y[:4]}, w={y[4:]}")
    return BodyState(q=np.array(y[:4]), w=np.array(y[4:]))


def simulate(
    state: BodyState,
    controller,
    J: np.ndarray,
    dt: float,
    duration: float,
    control_decimation: int = 1,
    torque_limit: float | None = None,
):
    """Integrate the closed loop and record the sampled trajectory.

    ``controller`` is a callable ``(t, BodyState) -> (tau, telemetry)`` invoked
    at t = 0 and then every ``control_decimation`` physics steps; the returned
    torque is held constant in between (and clamped per axis to
    ``torque_limit`` when one is configured).  Returns a list of samples
    ``(t, BodyState, tau, telemetry)`` with one entry per physics step plus
    the final state.  Controller and integration failures are re-raised as
    SimulationError tagged with the failure time.
    """
    if duration < 0.0:
        raise ValueError(f"duration must be non-negative, got {duration}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if control_decimation < 1:
        raise ValueError("control_decimation must be a positive integer")
    Jm = validate_inertia(J)
    Jl = Jm.tolist()
    Jinv = np.linalg.inv(Jm).tolist()

    def call_controller(t, s):
        try:
            tau, telemetry = controller(t, s)
        except SimulationError:
            raise
        except Exception as exc:
            raise SimulationError(f"controller failed at t={t:.6f}: {exc}") from exc
        tau = np.asarray(tau, dtype=float)
        if torque_limit is not None:
            tau = np.clip(tau, -torque_limit, torque_limit)
        return tau, telemetry

    n_steps = int(round(duration / dt))
    samples = []
    tau, telemetry = call_controller(0.0, state)
    y = (*state.q, *state.w)
    for k in range(n_steps):
        samples.append((k * dt, state, tau, telemetry))
        try:
            y = _rk4_core(y, tau[0], tau[1], tau[2], Jl, Jinv, dt)
        except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
            raise SimulationError(f"integration failed at t={k * dt:.6f}: {exc}") from exc
        if not (
            math.isfinite(y[0]) and math.isfinite(y[1]) and math.isfinite(y[2])
            and math.isfinite(y[3]) and math.isfinite(y[4]) and math.isfinite(y[5])
            and math.isfinite(y[6])
        ):
            raise SimulationError(
                f"non-finite state at t={(k + 1) * dt:.6f}: q={y[:4]}, w={y[4:]}"
            )
        state = BodyState(q=np.array(y[:4]), w=np.array(y[4:]))
        if (k + 1) % control_decimation == 0:
            tau, telemetry = call_controller((k + 1) * dt, state)
    samples.append((n_steps * dt, state, tau, telemetry))
    return samples
