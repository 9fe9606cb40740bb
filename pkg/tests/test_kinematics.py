"""順運動学、ツール点、ZYX オイラー角の変換をテストします。"""

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.exceptions import DimensionMismatchError, JointLimitError, RotationError, UnknownToolPointError
from src.models.kinematics import DHChain, DHJoint, rotation_error
from src.services.kinematics import (
    euler_zyx_to_rotation,
    forward_kinematics,
    rotation_to_euler_zyx,
    tool_point,
    wrap_angle,
)


def naive_dh(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    """1 関節分の変換を Rz·Tz·Tx·Rx の積として組み立てます。"""
    rz = np.eye(4)
    rz[:2, :2] = [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    tz = np.eye(4)
    tz[2, 3] = d
    tx = np.eye(4)
    tx[0, 3] = a
    rx = np.eye(4)
    rx[1:3, 1:3] = [[math.cos(alpha), -math.sin(alpha)], [math.sin(alpha), math.cos(alpha)]]
    return rz @ tz @ tx @ rx


def naive_fk(chain: DHChain, q: np.ndarray) -> np.ndarray:
    matrix = np.eye(4)
    for i, joint in enumerate(chain.joints):
        theta = q[i] + chain.offsets[i] + joint.theta_home
        matrix = matrix @ naive_dh(joint.a, joint.alpha, joint.d, theta)
    return matrix


def random_chain(rng: np.random.Generator, k: int = 7) -> DHChain:
    joints = tuple(
        DHJoint(
            a=float(rng.uniform(-300, 300)),
            alpha=float(rng.uniform(-math.pi + 1e-6, math.pi)),
            d=float(rng.uniform(-400, 400)),
            theta_home=float(rng.uniform(-math.pi + 1e-6, math.pi)),
        )
        for _ in range(k)
    )
    return DHChain(
        joints=joints,
        joint_limits=np.tile([-math.pi, math.pi], (k, 1)),
        tool_points={"flange": [0.0, 0.0, 0.0], "marker": rng.uniform(-150, 150, 3)},
        zero_offsets=rng.uniform(-0.02, 0.02, k),
    )


def single_joint_chain(d: float = 0.0, tool: tuple[float, float, float] = (0.0, 0.0, 0.0)) -> DHChain:
    return DHChain(
        joints=(DHJoint(a=0.0, alpha=0.0, d=d),),
        joint_limits=np.array([[-math.pi, math.pi]]),
        tool_points={"flange": [0.0, 0.0, 0.0], "tool": list(tool)},
    )


def test_single_joint_translation():
    """d だけを持つ 1 関節のチェーンはその分だけ並進することをテストします。"""
    pose = forward_kinematics(single_joint_chain(d=100.0), [0.0])
    np.testing.assert_allclose(pose.rotation, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(pose.translation, [0.0, 0.0, 100.0], atol=1e-12)


def test_zero_offsets_equal_absent_offsets(chain):
    """ゼロオフセットを 0 で明示しても省略しても同じ姿勢になることをテストします。"""
    q = np.array([0.1, -0.2, 0.3, -0.4, 0.5, -0.6, 0.7])
    explicit = chain.with_offsets(np.zeros(chain.k))
    a = forward_kinematics(chain, q)
    b = forward_kinematics(explicit, q)
    assert np.array_equal(a.rotation, b.rotation)
    assert np.array_equal(a.translation, b.translation)


def test_reference_chain_matches_matrix_product(chain):
    """参照チェーンの順運動学が 4×4 行列の積と一致することをテストします。"""
    q = np.array([0.1, -0.2, 0.3, -0.4, 0.5, -0.6, 0.7])
    expected = naive_fk(chain, q)
    pose = forward_kinematics(chain, q)
    np.testing.assert_allclose(pose.translation, expected[:3, 3], atol=1e-9)
    np.testing.assert_allclose(pose.rotation, expected[:3, :3], atol=1e-12)


def test_random_chains_match_matrix_product(rng):
    """ランダムなチェーンと関節構成 1000 例で順運動学が行列の積と一致することをテストします。"""
    worst = 0.0
    for _ in range(1000):
        chain = random_chain(rng)
        q = rng.uniform(-math.pi, math.pi, chain.k)
        expected = naive_fk(chain, q)
        pose = forward_kinematics(chain, q)
        worst = max(worst, float(np.max(np.abs(pose.translation - expected[:3, 3]))))
    assert worst < 1e-9, f"順運動学と行列の積の差が大きすぎます: {worst}"


def test_forward_kinematics_is_deterministic(chain):
    """同じ入力に対してビット単位で同じ結果を返すことをテストします。"""
    q = np.array([0.3, 0.2, -0.1, 1.0, 0.4, -0.5, 0.6])
    a = forward_kinematics(chain, q)
    b = forward_kinematics(chain, q)
    assert np.array_equal(a.as_matrix(), b.as_matrix())


def test_offsets_are_additive(chain, rng):
    """ゼロオフセット δ は関節角に δ を足すことと同じであることをテストします。"""
    for _ in range(100):
        delta = rng.uniform(-0.02, 0.02, chain.k)
        q = rng.uniform(chain.joint_limits[:, 0] * 0.9, chain.joint_limits[:, 1] * 0.9)
        with_offsets = forward_kinematics(chain.with_offsets(delta), q)
        shifted = forward_kinematics(chain, q + delta)
        np.testing.assert_allclose(with_offsets.as_matrix(), shifted.as_matrix(), rtol=0.0, atol=1e-12)


def test_returned_rotation_is_orthonormal(chain, rng):
    """返される回転行列が正規直交であることをテストします。"""
    for _ in range(100):
        q = rng.uniform(chain.joint_limits[:, 0], chain.joint_limits[:, 1])
        orthogonality, determinant = rotation_error(forward_kinematics(chain, q).rotation)
        assert orthogonality < 1e-9
        assert determinant < 1e-9


def test_forward_kinematics_errors(chain):
    """長さの不一致と可動範囲外が別のエラーになることをテストします。"""
    with pytest.raises(DimensionMismatchError):
        forward_kinematics(chain, np.zeros(6))
    q = np.zeros(7)
    q[1] = math.radians(121.0)
    with pytest.raises(JointLimitError) as info:
        forward_kinematics(chain, q)
    assert info.value.joint_index == 1


def test_tool_point_origin_equals_flange(chain):
    """原点のツール点はフランジの位置と一致することをテストします。"""
    q = np.array([0.2, 0.4, -0.3, 0.9, 0.1, -0.7, 0.5])
    np.testing.assert_array_equal(tool_point(chain, q, "flange"), forward_kinematics(chain, q).translation)


def test_tool_point_identity_flange():
    """フランジが恒等変換ならツール点の座標がそのまま返ることをテストします。"""
    chain = single_joint_chain(tool=(100.0, 0.0, 0.0))
    np.testing.assert_allclose(tool_point(chain, [0.0], "tool"), [100.0, 0.0, 0.0], atol=1e-12)


def test_tool_point_rotated_flange(chain):
    """回転したフランジでのツール点が行列の積と一致することをテストします。"""
    q = np.array([0.5, -0.6, 0.2, -1.1, 0.8, 0.9, -0.4])
    frame = naive_fk(chain, q)
    expected = frame[:3, :3] @ chain.tool_point_vector("sir") + frame[:3, 3]
    np.testing.assert_allclose(tool_point(chain, q, "sir"), expected, atol=1e-9)


def test_unknown_tool_point(chain):
    """未定義のツール点がエラーになることをテストします。"""
    with pytest.raises(UnknownToolPointError):
        tool_point(chain, np.zeros(7), "camera")


def test_euler_zero_is_identity():
    """角度がすべて 0 なら単位行列になることをテストします。"""
    np.testing.assert_array_equal(euler_zyx_to_rotation(0.0, 0.0, 0.0), np.eye(3))


def test_euler_matches_scipy():
    """Rz(γ)·Ry(θ)·Rx(φ) が scipy の内因性 ZYX と一致することをテストします。"""
    expected = Rotation.from_euler("ZYX", [0.4, -0.3, 1.2]).as_matrix()
    np.testing.assert_allclose(euler_zyx_to_rotation(0.4, -0.3, 1.2), expected, atol=1e-14)


def test_euler_round_trip():
    """一様に引いた 1000 個の回転がオイラー角を経由して元に戻ることをテストします。"""
    rotations = Rotation.random(1000, 2024).as_matrix()
    for matrix in rotations:
        gamma, theta, phi = rotation_to_euler_zyx(matrix)
        assert -math.pi / 2 <= theta <= math.pi / 2
        np.testing.assert_allclose(euler_zyx_to_rotation(gamma, theta, phi), matrix, atol=1e-10)


@pytest.mark.parametrize("theta", [math.pi / 2, -math.pi / 2])
def test_gimbal_lock_convention(theta):
    """ジンバルロックでは γ = 0 に固定し、残りを φ に含めることをテストします。"""
    matrix = euler_zyx_to_rotation(0.3, theta, 0.2)
    gamma, theta_out, phi = rotation_to_euler_zyx(matrix)
    assert gamma == 0.0
    assert theta_out == theta
    np.testing.assert_allclose(euler_zyx_to_rotation(gamma, theta_out, phi), matrix, atol=1e-12)


def test_inverse_rejects_non_orthonormal():
    """正規直交でない行列がエラーになることをテストします。"""
    with pytest.raises(RotationError):
        rotation_to_euler_zyx(np.diag([1.0, 1.0, 1.001]))


def test_wrap_angle_interval():
    """角度が (−π, π] に折り返されることをテストします。"""
    wrapped = wrap_angle([-math.pi, math.pi, 3 * math.pi / 2, -3 * math.pi / 2, 0.0])
    np.testing.assert_allclose(wrapped, [math.pi, math.pi, -math.pi / 2, math.pi / 2, 0.0], atol=1e-15)
