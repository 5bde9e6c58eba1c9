import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from attswitch.quat import (
    IDENTITY,
    from_axis_angle,
    quat_inverse,
    quat_kinematics,
    quat_mul,
    rotate_vector,
    to_axis_angle,
    yaw_of,
)

B3 = np.array([0.0, 0.0, 1.0])


def units(lo=-1.0, hi=1.0):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


@st.composite
def unit_quats(draw):
    v = np.array([draw(units()) for _ in range(4)])
    n = np.linalg.norm(v)
    if n < 1e-2:
        v = np.array([1.0, 0.0, 0.0, 0.0])
        n = 1.0
    return v / n


@st.composite
def vectors(draw, scale=5.0):
    return np.array([draw(units(-scale, scale)) for _ in range(3)])


class TestQuatMul:
    def test_identity_left(self):
        q = from_axis_angle(B3, 0.7)
        assert np.allclose(quat_mul(IDENTITY, q), q)

    def test_two_quarter_turns_compose_to_half_turn(self):
        # axis-angle composition oracle: 90 deg + 90 deg about b3 = 180 deg
        q90 = from_axis_angle(B3, math.pi / 2)
        q180 = quat_mul(q90, q90)
        assert np.allclose(q180, [0.0, 0.0, 0.0, 1.0], atol=1e-15)

    def test_q_times_inverse_is_identity(self, rng):
        for _ in range(20):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            assert np.allclose(quat_mul(q, quat_inverse(q)), IDENTITY, atol=1e-12)

    @given(unit_quats(), unit_quats(), unit_quats())
    def test_associative(self, a, b, c):
        left = quat_mul(quat_mul(a, b), c)
        right = quat_mul(a, quat_mul(b, c))
        assert np.allclose(left, right, atol=1e-12)

    @given(unit_quats(), unit_quats())
    def test_norm_preserved(self, a, b):
        q = quat_mul(a, b)
        assert abs(q @ q - 1.0) <= 1e-9


class TestInverse:
    def test_identity(self):
        assert np.allclose(quat_inverse(IDENTITY), IDENTITY)

    def test_conjugation(self):
        c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
        q = np.array([c, 0.0, 0.0, s])
        assert np.allclose(quat_inverse(q), [c, 0.0, 0.0, -s])


class TestAxisAngle:
    def test_zero_angle_is_identity(self):
        assert np.allclose(from_axis_angle(B3, 0.0), IDENTITY)

    def test_pi_about_b3(self):
        assert np.allclose(from_axis_angle(B3, math.pi), [0.0, 0.0, 0.0, 1.0], atol=1e-15)

    def test_negative_100_degrees(self):
        # trig oracle: cos(50 deg), -sin(50 deg)
        q = from_axis_angle(B3, math.radians(-100.0))
        assert q[0] == pytest.approx(math.cos(math.radians(50.0)), abs=1e-12)
        assert q[3] == pytest.approx(-math.sin(math.radians(50.0)), abs=1e-12)
        assert q[0] == pytest.approx(0.64279, abs=1e-5)
        assert q[3] == pytest.approx(-0.76604, abs=1e-5)

    def test_non_unit_axis_rejected(self):
        with pytest.raises(ValueError):
            from_axis_angle(np.array([0.0, 0.0, 2.0]), 0.3)

    def test_identity_convention(self):
        axis, angle = to_axis_angle(IDENTITY)
        assert angle == 0.0
        assert np.allclose(axis, B3)

    def test_half_turn_recovered(self):
        axis, angle = to_axis_angle(np.array([0.0, 0.0, 0.0, 1.0]))
        assert angle == pytest.approx(math.pi, abs=1e-15)
        assert np.allclose(axis, B3)

    def test_negative_rotation_comes_back_about_flipped_axis(self):
        # inverse trig oracle: angle 1.74533 rad about -b3
        q = from_axis_angle(B3, math.radians(-100.0))
        axis, angle = to_axis_angle(q)
        assert angle == pytest.approx(math.radians(100.0), abs=1e-12)
        assert np.allclose(axis, -B3, atol=1e-12)

    @given(vectors(scale=1.0), units(-2 * math.pi + 1e-6, 2 * math.pi))
    def test_round_trip(self, v, angle):
        n = np.linalg.norm(v)
        if n < 1e-3:
            v = np.array([0.0, 1.0, 0.0])
            n = 1.0
        q = from_axis_angle(v / n, angle)
        axis, ang = to_axis_angle(q)
        q2 = from_axis_angle(axis, ang)
        # same rotation up to global sign
        assert min(np.max(np.abs(q2 - q)), np.max(np.abs(q2 + q))) <= 1e-9


class TestRotateVector:
    def test_identity(self):
        v = np.array([0.3, -0.2, 0.9])
        assert np.allclose(rotate_vector(IDENTITY, v), v)

    def test_half_turn_flips_x(self):
        q = from_axis_angle(B3, math.pi)
        assert np.allclose(rotate_vector(q, np.array([1.0, 0.0, 0.0])), [-1.0, 0.0, 0.0])

    @given(unit_quats(), vectors())
    def test_isometry(self, q, v):
        assert np.linalg.norm(rotate_vector(q, v)) == pytest.approx(
            np.linalg.norm(v), abs=1e-9, rel=1e-9
        )


class TestYaw:
    def test_identity(self):
        assert yaw_of(IDENTITY) == 0.0

    def test_quarter_turn(self):
        assert yaw_of(from_axis_angle(B3, math.pi / 2)) == pytest.approx(math.pi / 2)

    def test_100_degrees(self):
        assert yaw_of(from_axis_angle(B3, math.radians(100.0))) == pytest.approx(
            1.74533, abs=1e-5
        )


class TestKinematics:
    def test_identity_spin_about_b3(self):
        # 0.5 * identity x (0, 0, 0, 2) = (0, 0, 0, 1) by hand expansion
        qdot = quat_kinematics(IDENTITY, np.array([0.0, 0.0, 2.0]))
        assert np.allclose(qdot, [0.0, 0.0, 0.0, 1.0])

    def test_zero_rate(self):
        q = from_axis_angle(B3, 1.0)
        assert np.allclose(quat_kinematics(q, np.zeros(3)), np.zeros(4))

    @given(unit_quats(), vectors())
    def test_orthogonal_to_q(self, q, w):
        # exact analytically: the norm is conserved by the kinematics
        assert abs(q @ quat_kinematics(q, w)) <= 1e-12
