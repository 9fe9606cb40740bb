"""標準 D-H 規約による順運動学と回転・オイラー角のユーティリティです。

関節 i の変換は A = Rz(θ)·Tz(d)·Tx(a)·Rx(α) で、θ = qᵢ + δθᵢ + theta_homeᵢ です。
関数はすべて純粋で、同じ入力に対してビット単位で同じ結果を返します。
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from ..config import kinematics_config
from ..exceptions import DimensionMismatchError
from ..models.kinematics import DHChain, DHJoint, FloatArray, Pose, require_rotation


def dh_matrix(a: float, alpha: float, d: float, theta: float) -> FloatArray:
    """
    1 関節分の同次変換行列を返します。

    Parameters
    ----------
    a : float
        リンク長 (mm) です。
    alpha : float
        ねじれ角 (rad) です。
    d : float
        オフセット (mm) です。
    theta : float
        関節角 (rad) です。

    Returns
    -------
    FloatArray
        4×4 の同次変換行列です。
    """
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, a * ct],
            [st, ct * ca, -ct * sa, a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def joint_angles(chain: DHChain, q: ArrayLike) -> FloatArray:
    """D-H 変換に使う実効関節角 q + δθ + theta_home を返します。"""
    return np.asarray(q, dtype=np.float64) + chain.offsets + chain.home_vector


def forward_kinematics_batch(chain: DHChain, configs: ArrayLike) -> FloatArray:
    """
    複数の関節構成に対するフランジ姿勢をまとめて計算します。

    Parameters
    ----------
    chain : DHChain
        ロボットモデルです。
    configs : ArrayLike
        形状 (n, k) の関節構成 (rad) です。

    Returns
    -------
    FloatArray
        形状 (n, 4, 4) の同次変換行列です。

    Raises
    ------
    DimensionMismatchError
        列数が関節数と一致しない場合に発生します。

    Notes
    -----
    可動範囲は検査しません。校正の内側ループなど、検査済みの構成に対して使います。
    """
    q = np.atleast_2d(np.asarray(configs, dtype=np.float64))
    if q.shape[1] != chain.k:
        raise DimensionMismatchError("joint configuration", chain.k, int(q.shape[1]))
    theta = joint_angles(chain, q)
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(chain.alpha_vector), np.sin(chain.alpha_vector)
    a, d = chain.a_vector, chain.d_vector

    n = q.shape[0]
    result = np.broadcast_to(np.eye(4), (n, 4, 4)).copy()
    link = np.zeros((n, 4, 4))
    link[:, 3, 3] = 1.0
    for i in range(chain.k):
        link[:, 0, 0] = ct[:, i]
        link[:, 0, 1] = -st[:, i] * ca[i]
        link[:, 0, 2] = st[:, i] * sa[i]
        link[:, 0, 3] = a[i] * ct[:, i]
        link[:, 1, 0] = st[:, i]
        link[:, 1, 1] = ct[:, i] * ca[i]
        link[:, 1, 2] = -ct[:, i] * sa[i]
        link[:, 1, 3] = a[i] * st[:, i]
        link[:, 2, 1] = sa[i]
        link[:, 2, 2] = ca[i]
        link[:, 2, 3] = d[i]
        result = np.matmul(result, link)
    return result


def forward_kinematics(chain: DHChain, q: ArrayLike) -> Pose:
    """
    フランジの姿勢をロボット基準座標系 R で返します。

    Parameters
    ----------
    chain : DHChain
        ロボットモデルです。
    q : ArrayLike
        関節構成 (rad) です。

    Returns
    -------
    Pose
        フランジの姿勢です。

    Raises
    ------
    DimensionMismatchError
        関節構成の長さが関節数と一致しない場合に発生します。
    JointLimitError
        可動範囲外の関節がある場合に発生します。
    """
    angles = chain.validate_config(q)
    matrix = forward_kinematics_batch(chain, angles[np.newaxis, :])[0]
    return Pose(matrix[:3, :3], matrix[:3, 3])


def tool_point(chain: DHChain, q: ArrayLike, point_name: str) -> FloatArray:
    """
    名前付きツール点の位置をロボット基準座標系 R で返します。

    Parameters
    ----------
    chain : DHChain
        ロボットモデルです。
    q : ArrayLike
        関節構成 (rad) です。
    point_name : str
        ツール点の名前です。

    Returns
    -------
    FloatArray
        ツール点の位置 (mm) です。

    Raises
    ------
    UnknownToolPointError
        ツール点が定義されていない場合に発生します。
    """
    point = chain.tool_point_vector(point_name)
    pose = forward_kinematics(chain, q)
    return pose.rotation @ point + pose.translation


def tool_points_batch(chain: DHChain, configs: ArrayLike, point_name: str) -> FloatArray:
    """
    複数の関節構成に対するツール点の位置をまとめて計算します。

    Returns
    -------
    FloatArray
        形状 (n, 3) の位置 (mm) です。
    """
    point = chain.tool_point_vector(point_name)
    frames = forward_kinematics_batch(chain, configs)
    return np.einsum("nij,j->ni", frames[:, :3, :3], point) + frames[:, :3, 3]


def rot_x(angle: float) -> FloatArray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> FloatArray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> FloatArray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_zyx_to_rotation(gamma: float, theta: float, phi: float) -> FloatArray:
    """
    ZYX オイラー角から回転行列 Rz(γ)·Ry(θ)·Rx(φ) を作ります。

    Parameters
    ----------
    gamma : float
        Z 軸まわりの角度 (rad) です。
    theta : float
        Y 軸まわりの角度 (rad) です。
    phi : float
        X 軸まわりの角度 (rad) です。

    Returns
    -------
    FloatArray
        3×3 の回転行列です。
    """
    cg, sg = math.cos(gamma), math.sin(gamma)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    return np.array(
        [
            [cg * ct, cg * st * sp - sg * cp, cg * st * cp + sg * sp],
            [sg * ct, sg * st * sp + cg * cp, sg * st * cp - cg * sp],
            [-st, ct * sp, ct * cp],
        ]
    )


def rotation_to_euler_zyx(matrix: ArrayLike) -> tuple[float, float, float]:
    """
    回転行列を ZYX オイラー角 (γ, θ, φ) に変換します。

    Parameters
    ----------
    matrix : ArrayLike
        3×3 の回転行列です。

    Returns
    -------
    tuple[float, float, float]
        (γ, θ, φ) (rad) です。θ は [−π/2, π/2] に入ります。

    Raises
    ------
    RotationError
        入力が正規直交でない場合に発生します。

    Notes
    -----
    |θ| = π/2 のジンバルロックでは γ = 0 とし、残りの回転をすべて φ に含めます。
    θ = +π/2 では φ = atan2(R01, R11)、θ = −π/2 では φ = atan2(−R01, R11) です。
    """
    r = require_rotation(matrix)
    cos_theta = math.hypot(r[0, 0], r[1, 0])
    theta = math.atan2(-r[2, 0], cos_theta)
    if cos_theta < kinematics_config.GIMBAL_LOCK_TOLERANCE:
        if r[2, 0] < 0.0:
            return 0.0, math.pi / 2, math.atan2(r[0, 1], r[1, 1])
        return 0.0, -math.pi / 2, math.atan2(-r[0, 1], r[1, 1])
    gamma = math.atan2(r[1, 0], r[0, 0])
    phi = math.atan2(r[2, 1], r[2, 2])
    return gamma, theta, phi


def wrap_angle(angle: ArrayLike) -> FloatArray:
    """角度を (−π, π] に折り返します。"""
    wrapped = np.mod(np.asarray(angle, dtype=np.float64) + math.pi, 2.0 * math.pi) - math.pi
    return np.where(wrapped <= -math.pi, wrapped + 2.0 * math.pi, wrapped)


def reference_chain() -> DHChain:
    """
    組み込みの 7 自由度 S-R-S 参照チェーンを返します。

    Returns
    -------
    DHChain
        ゼロオフセットがすべて 0 の参照チェーンです。
    """
    joints = tuple(
        DHJoint(a=0.0, alpha=alpha, d=d)
        for d, alpha in zip(kinematics_config.REFERENCE_D_MM, kinematics_config.REFERENCE_ALPHA_RAD, strict=True)
    )
    limits = np.radians(np.array(kinematics_config.REFERENCE_LIMITS_DEG))
    return DHChain(
        joints=joints,
        joint_limits=np.column_stack([-limits, limits]),
        tool_points={name: np.array(point) for name, point in kinematics_config.REFERENCE_TOOL_POINTS_MM},
        name=kinematics_config.REFERENCE_CHAIN_NAME,
    )
