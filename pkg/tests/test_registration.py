"""3 点による位置合わせと補正変換をテストします。"""

import itertools
import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.exceptions import CollinearPointsError, DimensionMismatchError, RegistrationError
from src.models.calibration import RegistrationCorrection
from src.models.kinematics import RigidTransform
from src.services.registration import (
    corrected_transform,
    map_robot_point,
    register_three_points,
    select_registration_triple,
    triangle_area,
)

ZERO = RegistrationCorrection(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_identity_registration():
    """同じ 3 点どうしの位置合わせが恒等変換になることをテストします。"""
    points = np.array([[0.0, 0.0, 0.0], [100.0, 0.0, 0.0], [0.0, 100.0, 0.0]])
    transform = register_three_points(points, points)
    np.testing.assert_allclose(transform.as_matrix(), np.eye(4), atol=1e-12)


def test_random_rigid_transforms_are_recovered(rng):
    """ランダムな剛体変換 1000 例を 3 点から復元できることをテストします。"""
    rotations = Rotation.random(1000, 99).as_matrix()
    worst = 0.0
    for rotation in rotations:
        truth = RigidTransform(rotation, rng.uniform(-2000.0, 2000.0, 3))
        p_r = rng.uniform(-800.0, 800.0, (3, 3))
        while triangle_area(*p_r) <= 1e3:
            p_r = rng.uniform(-800.0, 800.0, (3, 3))
        transform = register_three_points(truth.apply(p_r), p_r)
        worst = max(worst, float(np.max(np.abs(transform.as_matrix() - truth.as_matrix()))))
    assert worst < 1e-9, f"復元した変換の誤差が大きすぎます: {worst}"


def test_collinear_points():
    """同一直線上の 3 点がエラーになることをテストします。"""
    collinear = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    good = np.array([[0.0, 0.0, 0.0], [100.0, 0.0, 0.0], [0.0, 100.0, 0.0]])
    with pytest.raises(CollinearPointsError):
        register_three_points(good, collinear)
    with pytest.raises(CollinearPointsError):
        register_three_points(collinear, good)


def test_point_count_mismatch():
    """点の数が 3 でない場合にエラーになることをテストします。"""
    four = np.array([[0.0, 0.0, 0.0], [100.0, 0.0, 0.0], [0.0, 100.0, 0.0], [0.0, 0.0, 100.0]])
    with pytest.raises(DimensionMismatchError):
        register_three_points(four, four[:3])


def test_zero_correction_returns_initial():
    """補正が 0 なら初期変換そのものになることをテストします。"""
    initial = RigidTransform(Rotation.from_euler("ZYX", [0.3, -0.2, 0.1]).as_matrix(), [10.0, -20.0, 30.0])
    np.testing.assert_allclose(corrected_transform(initial, ZERO).as_matrix(), initial.as_matrix(), atol=1e-15)


def test_translation_only_correction():
    """並進だけの補正は初期変換の並進に足されることをテストします。"""
    initial = RigidTransform(np.eye(3), [10.0, -20.0, 30.0])
    theta1 = RegistrationCorrection(1.0, 2.0, 3.0, 0.0, 0.0, 0.0)
    matrix = corrected_transform(initial, theta1).as_matrix()
    np.testing.assert_allclose(matrix[:3, 3], [11.0, -18.0, 33.0], atol=1e-12)
    np.testing.assert_allclose(matrix[:3, :3], np.eye(3), atol=1e-15)


def test_correction_matches_matrix_product():
    """T*(Θ₁)·ᴺᵣT が 4×4 行列の積と一致することをテストします。"""
    initial = RigidTransform(Rotation.from_euler("ZYX", [1.1, 0.4, -0.7]).as_matrix(), [1200.0, -300.0, 450.0])
    theta1 = RegistrationCorrection(0.5, -1.5, 2.0, math.radians(0.3), math.radians(-0.2), math.radians(0.1))
    correction = np.eye(4)
    correction[:3, :3] = Rotation.from_euler("ZYX", [theta1.alpha, theta1.beta, theta1.gamma]).as_matrix()
    correction[:3, 3] = [theta1.x, theta1.y, theta1.z]
    expected = correction @ initial.as_matrix()
    np.testing.assert_allclose(corrected_transform(initial, theta1).as_matrix(), expected, atol=1e-9)


def test_map_robot_point_sends_triple_to_reference():
    """位置合わせに使った 3 点が参照座標系の 3 点に写ることをテストします。"""
    truth = RigidTransform(Rotation.from_euler("ZYX", [2.9, 0.1, -0.05]).as_matrix(), [1800.0, 200.0, 900.0])
    p_r = np.array([[300.0, 100.0, 500.0], [-200.0, 400.0, 700.0], [100.0, -350.0, 650.0]])
    p_n = truth.apply(p_r)
    initial = register_three_points(p_n, p_r)
    np.testing.assert_allclose(map_robot_point(initial, ZERO, p_r), p_n, atol=1e-9)


def test_select_triple_planar_fallback():
    """平面上の点では凸包を使わずに面積最大の組を選ぶことをテストします。"""
    points = np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]]
    )
    assert select_registration_triple(points) == (0, 3, 4)


def test_select_triple_matches_brute_force(rng):
    """空間内の点で全探索と同じ組を選ぶことをテストします。"""
    for _ in range(20):
        points = rng.uniform(-500.0, 500.0, (12, 3))
        areas = {
            triple: triangle_area(*points[list(triple)]) for triple in itertools.combinations(range(12), 3)
        }
        expected = max(areas, key=areas.get)
        assert select_registration_triple(points) == expected


def test_select_triple_needs_three_points():
    with pytest.raises(RegistrationError):
        select_registration_triple(np.zeros((2, 3)))
