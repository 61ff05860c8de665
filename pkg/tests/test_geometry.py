import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.transform import Rotation

from teleopsim.geometry import (
    Pose,
    orientation_error,
    quat_from_rot,
    quat_from_yaw,
    quat_mul,
    quat_normalize,
    rot_from_quat,
    rot_from_rotvec,
    rotvec_from_rot,
    wrap_angle,
    yaw_from_quat,
)

angles = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


@given(angles)
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi


@given(angles)
def test_wrap_angle_periodic(a):
    assert wrap_angle(a + 2 * math.pi) == pytest.approx(wrap_angle(a), abs=1e-9)


def test_wrap_angle_boundaries():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(0.0) == 0.0


def _random_rotations(n, seed):
    rng = np.random.default_rng(seed)
    return Rotation.random(n, random_state=rng)


def test_quat_round_trip_against_scipy():
    for r in _random_rotations(200, seed=7):
        mat = r.as_matrix()
        q = quat_from_rot(mat)
        assert np.linalg.norm(q) == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(rot_from_quat(q), mat, atol=1e-9)


def test_rotvec_log_matches_scipy():
    for r in _random_rotations(200, seed=11):
        mat = r.as_matrix()
        np.testing.assert_allclose(
            rotvec_from_rot(mat), Rotation.from_matrix(mat).as_rotvec(), atol=1e-7
        )


def test_rotvec_near_pi():
    for axis in (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]),
                 np.array([0.6, -0.8, 0.0]), np.array([1, 1, 1]) / math.sqrt(3)):
        for angle in (math.pi, math.pi - 1e-8, math.pi - 1e-4):
            mat = Rotation.from_rotvec(axis * angle).as_matrix()
            back = rotvec_from_rot(mat)
            # Axis sign is ambiguous exactly at pi; compare rotations.
            np.testing.assert_allclose(rot_from_rotvec(back), mat, atol=1e-6)


def test_quat_mul_matches_matrix_product():
    for ra, rb in zip(_random_rotations(50, 3), _random_rotations(50, 4)):
        qa = quat_from_rot(ra.as_matrix())
        qb = quat_from_rot(rb.as_matrix())
        np.testing.assert_allclose(
            rot_from_quat(quat_normalize(quat_mul(qa, qb))),
            ra.as_matrix() @ rb.as_matrix(),
            atol=1e-9,
        )


def test_pose_compose_inverse_identity():
    rng = np.random.default_rng(5)
    for r in _random_rotations(50, 9):
        pose = Pose(rng.normal(size=3), quat_from_rot(r.as_matrix()))
        ident = pose.compose(pose.inverse())
        np.testing.assert_allclose(ident.position, 0.0, atol=1e-9)
        np.testing.assert_allclose(rot_from_quat(ident.orientation), np.eye(3), atol=1e-9)


def test_pose_compose_matches_matrix_chain():
    rng = np.random.default_rng(15)
    for ra, rb in zip(_random_rotations(50, 21), _random_rotations(50, 22)):
        a = Pose(rng.normal(size=3), quat_from_rot(ra.as_matrix()))
        b = Pose(rng.normal(size=3), quat_from_rot(rb.as_matrix()))
        ab = a.compose(b)
        ta, tb = np.eye(4), np.eye(4)
        ta[:3, :3], ta[:3, 3] = a.rotation(), a.position
        tb[:3, :3], tb[:3, 3] = b.rotation(), b.position
        tab = ta @ tb
        np.testing.assert_allclose(ab.position, tab[:3, 3], atol=1e-9)
        np.testing.assert_allclose(ab.rotation(), tab[:3, :3], atol=1e-9)


def test_pose_rejects_non_unit_quaternion():
    with pytest.raises(ValueError):
        Pose(np.zeros(3), np.array([1.0, 0.0, 0.1, 0.0]))


def test_pose_dict_round_trip():
    pose = Pose.from_xyzrpy([1.0, -2.0, 0.5], [0.1, -0.2, 0.3])
    back = Pose.from_dict(pose.to_dict())
    np.testing.assert_allclose(back.position, pose.position, atol=1e-12)
    np.testing.assert_allclose(back.orientation, pose.orientation, atol=1e-12)


def test_yaw_quaternion_round_trip():
    for yaw in np.linspace(-3.1, 3.1, 25):
        assert yaw_from_quat(quat_from_yaw(yaw)) == pytest.approx(yaw, abs=1e-12)


def test_orientation_error_magnitude():
    ra = Rotation.from_rotvec([0.0, 0.0, 0.3]).as_matrix()
    rb = np.eye(3)
    err = orientation_error(ra, rb)
    np.testing.assert_allclose(err, [0.0, 0.0, 0.3], atol=1e-12)
