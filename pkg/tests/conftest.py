import numpy as np
import pytest

from attswitch.quat import quat_kinematics


def rand_unit_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def half_rate_left(w, q):
    """Full 4-vector 0.5 * [0, w] x q (left Hamilton product, no renorm).

    quat_mul cannot be used for this: its unit-quaternion contract
    renormalizes the product, and [0, w] is not unit.
    """
    m, n = q[0], q[1:]
    return 0.5 * np.array(
        [
            -w @ n,
            m * w[0] + w[1] * n[2] - w[2] * n[1],
            m * w[1] + w[2] * n[0] - w[0] * n[2],
            m * w[2] + w[0] * n[1] - w[1] * n[0],
        ]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def integrate_feedback(q0, w0, torque_of, J, dt, n_steps):
    """RK4 on the open-loop dynamics with the torque re-evaluated inside
    every derivative call (continuous feedback, no zero-order hold).

    Used as the reference flow for finite-difference equivalence checks,
    where the hold error of the production integrator would swamp the
    tolerance.  Returns (t, q, w) arrays with n_steps+1 samples.
    """
    Jinv = np.linalg.inv(J)

    def deriv(y):
        q, w = y[:4], y[4:]
        tau = torque_of(q, w)
        qdot = quat_kinematics(q, w)
        wdot = Jinv @ (tau - np.cross(w, J @ w))
        return np.concatenate([qdot, wdot])

    y = np.concatenate([q0, w0])
    out = np.empty((n_steps + 1, 7))
    out[0] = y
    for k in range(n_steps):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * dt * k1)
        k3 = deriv(y + 0.5 * dt * k2)
        k4 = deriv(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        y[:4] /= np.linalg.norm(y[:4])
        out[k + 1] = y
    t = np.arange(n_steps + 1) * dt
    return t, out[:, :4], out[:, 4:]
