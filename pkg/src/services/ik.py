"""7 自由度 S-R-S アームの解析的逆運動学です。

冗長自由度はアーム角 ψ で表します。ψ = 0 は q3 = 0 の参照平面に対応し、
ψ だけ肩と手首を結ぶ軸まわりに腕全体を回した姿勢を解きます。
各 ψ について肩、肘、手首の符号の組み合わせから最大 8 つの分岐が得られます。
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.transform import Rotation

from ..config import ik_config
from ..exceptions import IKError, RemasterError, UnreachableTargetError, UnsupportedTopologyError
from ..logger import get_logger
from ..models.ik import EnumerationDiagnostics, IKRequest, IKSolutionSet
from ..models.kinematics import DHChain, FloatArray, JointConfig, Pose
from .kinematics import forward_kinematics_batch, joint_angles, rot_x, rot_y, rot_z, wrap_angle

logger = get_logger(__name__)

_SRS_ALPHA = (-math.pi / 2, math.pi / 2, math.pi / 2, -math.pi / 2, -math.pi / 2, math.pi / 2, 0.0)
_TOPOLOGY_TOLERANCE = 1e-12
_SIGNS = (1, -1)


def _label(sign: int) -> str:
    return "+" if sign > 0 else "-"


def check_topology(chain: DHChain) -> tuple[float, float, float, float]:
    """
    チェーンが S-R-S 構成であることを確認し、(d1, d3, d5, d7) を返します。

    Raises
    ------
    UnsupportedTopologyError
        関節数、a、α、d の並びが対応する構成と一致しない場合に発生します。
    """
    if chain.k != 7:
        raise UnsupportedTopologyError(f"expected 7 joints, got {chain.k}")
    if np.any(np.abs(chain.a_vector) > _TOPOLOGY_TOLERANCE):
        raise UnsupportedTopologyError("all link lengths a must be zero")
    if np.any(np.abs(chain.alpha_vector - np.array(_SRS_ALPHA)) > _TOPOLOGY_TOLERANCE):
        raise UnsupportedTopologyError("twist angles do not follow the S-R-S pattern")
    d = chain.d_vector
    if np.any(np.abs(d[[1, 3, 5]]) > _TOPOLOGY_TOLERANCE):
        raise UnsupportedTopologyError("d2, d4 and d6 must be zero")
    if d[2] <= 0.0 or d[4] <= 0.0:
        raise UnsupportedTopologyError("upper arm and forearm lengths must be positive")
    return float(d[0]), float(d[2]), float(d[4]), float(d[6])


def reach(chain: DHChain) -> float:
    """肩から手首中心までの最大到達距離 d3 + d5 (mm) を返します。"""
    _, d3, d5, _ = check_topology(chain)
    return d3 + d5


def default_arm_angles(count: int | None = None) -> tuple[float, ...]:
    """
    (−π, π] を等分した既定のアーム角を返します。

    Parameters
    ----------
    count : int | None
        分割数です。None の場合は設定値を使用します。

    Returns
    -------
    tuple[float, ...]
        −π + 2π(j+1)/count (j = 0..count−1) です。
    """
    n = ik_config.DEFAULT_ARM_ANGLE_COUNT if count is None else count
    if n < 1:
        raise IKError(f"Arm angle count must be positive, got {n}")
    return tuple(-math.pi + 2.0 * math.pi * (j + 1) / n for j in range(n))


def _solve_zyz(m: FloatArray, sign: int) -> tuple[float, float, float, bool]:
    """M = Rz(a)·Ry(b)·Rz(c) を解きます。sign は b の正弦の符号です。"""
    s = math.hypot(m[0, 2], m[1, 2])
    if s < ik_config.SINGULAR_SINE_TOLERANCE:
        b = 0.0 if m[2, 2] > 0.0 else math.pi
        return 0.0, b, math.atan2(m[1, 0], m[1, 1]), True
    b = math.atan2(sign * s, m[2, 2])
    a = math.atan2(sign * m[1, 2], sign * m[0, 2])
    c = math.atan2(sign * m[2, 1], -sign * m[2, 0])
    return a, b, c, False


def _elbow_angle(distance: float, d3: float, d5: float) -> float:
    """肩と手首中心の距離から |q4| を返します。"""
    full = d3 + d5
    folded = abs(d3 - d5)
    sin_half = math.sqrt(max((full - distance) * (full + distance), 0.0))
    cos_half = math.sqrt(max((distance - folded) * (distance + folded), 0.0))
    return 2.0 * math.atan2(sin_half, cos_half)


def _reference_shoulder(x_sw: FloatArray, q4: float, d3: float, d5: float) -> FloatArray:
    """q3 = 0 の参照平面での R03 を返します。"""
    vx = -d5 * math.sin(q4)
    vz = d3 + d5 * math.cos(q4)
    phi_v = math.atan2(vx, vz)
    horizontal = math.hypot(x_sw[0], x_sw[1])
    q1 = math.atan2(x_sw[1], x_sw[0]) if horizontal > ik_config.SINGULAR_SINE_TOLERANCE else 0.0
    q2 = math.atan2(horizontal, x_sw[2]) - phi_v
    return rot_z(q1) @ rot_y(q2) @ rot_x(math.pi / 2)


def _wrist_vector(chain: DHChain, target: Pose) -> tuple[FloatArray, float]:
    d1, d3, d5, d7 = check_topology(chain)
    wrist = target.translation - d7 * target.rotation[:, 2]
    x_sw = wrist - np.array([0.0, 0.0, d1])
    distance = float(np.linalg.norm(x_sw))
    full = d3 + d5
    if distance > full + ik_config.ELBOW_REACH_TOLERANCE_MM:
        raise UnreachableTargetError(distance, full)
    if distance < abs(d3 - d5) - ik_config.ELBOW_REACH_TOLERANCE_MM or distance < ik_config.SINGULAR_SINE_TOLERANCE:
        raise UnreachableTargetError(distance, full)
    return x_sw, distance


def arm_angle(chain: DHChain, q: ArrayLike) -> float:
    """
    関節構成のアーム角 ψ を返します。

    Parameters
    ----------
    chain : DHChain
        S-R-S 構成のチェーンです。
    q : ArrayLike
        関節構成 (rad) です。

    Returns
    -------
    float
        (−π, π] のアーム角 (rad) です。

    Notes
    -----
    ψ は実際の R03 と参照平面の R03° の相対回転 R03·R03°ᵀ を
    肩と手首を結ぶ軸 u まわりの回転とみなした角度です。
    """
    d1, d3, d5, _ = check_topology(chain)
    theta = joint_angles(chain, chain.validate_config(q, check_limits=False))
    r03 = rot_z(theta[0]) @ rot_y(theta[1]) @ rot_z(theta[2]) @ rot_x(math.pi / 2)
    v = np.array([-d5 * math.sin(theta[3]), 0.0, d3 + d5 * math.cos(theta[3])])
    x_sw = rot_z(theta[0]) @ rot_y(theta[1]) @ rot_z(theta[2]) @ v
    u = x_sw / np.linalg.norm(x_sw)
    relative = r03 @ _reference_shoulder(x_sw, float(theta[3]), d3, d5).T
    vee = np.array(
        [
            relative[2, 1] - relative[1, 2],
            relative[0, 2] - relative[2, 0],
            relative[1, 0] - relative[0, 1],
        ]
    )
    sin_psi = 0.5 * float(u @ vee)
    cos_psi = 0.5 * (float(np.trace(relative)) - 1.0)
    return math.atan2(sin_psi, cos_psi)


def _round_trip_ok(chain: DHChain, q: JointConfig, target: Pose) -> bool:
    frame = forward_kinematics_batch(chain, q[np.newaxis, :])[0]
    translation_error = float(np.linalg.norm(frame[:3, 3] - target.translation))
    rotation_error = float(np.linalg.norm(frame[:3, :3] - target.rotation))
    return (
        translation_error < ik_config.ROUND_TRIP_TRANSLATION_TOLERANCE_MM
        and rotation_error < ik_config.ROUND_TRIP_ROTATION_TOLERANCE
    )


def solve_ik(chain: DHChain, request: IKRequest) -> IKSolutionSet:
    """
    目標姿勢に対するすべての離散解を列挙します。

    Parameters
    ----------
    chain : DHChain
        S-R-S 構成のチェーンです。ゼロオフセットと theta_home は解から差し引かれます。
    request : IKRequest
        目標姿勢とアーム角です。

    Returns
    -------
    IKSolutionSet
        分岐ラベル順、その中でアーム角順に並んだ解です。

    Raises
    ------
    UnreachableTargetError
        手首中心が到達範囲外の場合に発生します。
    UnsupportedTopologyError
        チェーンが S-R-S 構成でない場合に発生します。

    Notes
    -----
    可動範囲外、重複、FK 検算の失敗で捨てた分岐は黙って除き、診断情報に数えます。
    肘が伸び切っている場合 (距離が到達距離から 1e-6 mm 以内) は q4 = 0 の分岐だけを解きます。
    """
    _, d3, d5, _ = check_topology(chain)
    target = request.target
    x_sw, distance = _wrist_vector(chain, target)
    u_sw = x_sw / distance
    elbow_singular = (d3 + d5) - distance <= ik_config.ELBOW_REACH_TOLERANCE_MM
    q4_magnitude = 0.0 if elbow_singular else _elbow_angle(distance, d3, d5)
    elbow_signs = (1,) if elbow_singular else _SIGNS
    subtract = chain.offsets + chain.home_vector

    result = IKSolutionSet()
    diagnostics = result.diagnostics
    for shoulder, elbow, wrist in itertools.product(_SIGNS, elbow_signs, _SIGNS):
        q4 = elbow * q4_magnitude
        reference = _reference_shoulder(x_sw, q4, d3, d5)
        for psi in request.arm_angles:
            r03 = Rotation.from_rotvec(psi * u_sw).as_matrix() @ reference
            q1, q2, q3, shoulder_singular = _solve_zyz(r03 @ rot_x(-math.pi / 2), shoulder)
            r04 = r03 @ rot_z(q4) @ rot_x(-math.pi / 2)
            q5, q6, q7, wrist_singular = _solve_zyz(r04.T @ target.rotation, wrist)
            if shoulder_singular or wrist_singular:
                diagnostics.singular += 1

            q = wrap_angle(np.array([q1, q2, q3, q4, q5, q6, q7]) - subtract)
            if not chain.within_limits(q):
                diagnostics.out_of_limits += 1
                continue
            if any(np.max(np.abs(q - existing)) < ik_config.DUPLICATE_TOLERANCE_RAD for existing in result.solutions):
                diagnostics.duplicate += 1
                continue
            if not _round_trip_ok(chain, q, target):
                diagnostics.round_trip_failed += 1
                continue
            result.solutions.append(q)
            result.branch_labels.append((_label(shoulder), _label(elbow), _label(wrist)))
            result.arm_angles.append(psi)
    return result


def enumerate_configurations_with_diagnostics(
    chain: DHChain, targets: Sequence[Pose], arm_angles: Sequence[float]
) -> tuple[list[tuple[int, JointConfig]], EnumerationDiagnostics]:
    """
    複数の目標姿勢の解を連結し、飛ばした姿勢の診断情報とともに返します。

    Notes
    -----
    姿勢ごとの逆運動学エラーはその姿勢を飛ばすだけで、一括処理は中断しません。
    """
    records: list[tuple[int, JointConfig]] = []
    diagnostics = EnumerationDiagnostics()
    angles = tuple(arm_angles)
    for pose_index, target in enumerate(targets):
        try:
            solution_set = solve_ik(chain, IKRequest(target, angles))
        except RemasterError as e:
            logger.warning(f"Skipping pose {pose_index}: {e.message}")
            diagnostics.skipped_poses.append((pose_index, e.message))
            continue
        diagnostics.branches.merge(solution_set.diagnostics)
        if not solution_set.solutions:
            logger.debug(f"Pose {pose_index} has no in-limit solution ({solution_set.diagnostics.as_dict()})")
        records.extend((pose_index, q) for q in solution_set.solutions)
    logger.info(f"Enumerated {len(records)} configurations from {len(targets)} poses")
    return records, diagnostics


def enumerate_configurations(
    chain: DHChain, targets: Sequence[Pose], arm_angles: Sequence[float]
) -> list[tuple[int, JointConfig]]:
    """
    複数の目標姿勢の解を (姿勢番号, 関節構成) の平坦なリストで返します。

    Parameters
    ----------
    chain : DHChain
        S-R-S 構成のチェーンです。
    targets : Sequence[Pose]
        フランジの目標姿勢です。
    arm_angles : Sequence[float]
        アーム角 (rad) です。

    Returns
    -------
    list[tuple[int, JointConfig]]
        姿勢順、分岐ラベル順、アーム角順に並んだ構成です。
    """
    records, _ = enumerate_configurations_with_diagnostics(chain, targets, arm_angles)
    return records


def thin_configurations(
    records: Sequence[tuple[int, JointConfig]], max_per_pose: int
) -> list[tuple[int, JointConfig]]:
    """
    各姿勢の関節構成を最大 max_per_pose 個まで等間隔に間引きます。

    Parameters
    ----------
    records : Sequence[tuple[int, JointConfig]]
        enumerate_configurations が返す (姿勢番号, 関節構成) の並びです。
    max_per_pose : int
        1 つの姿勢から残す構成の最大数です。

    Returns
    -------
    list[tuple[int, JointConfig]]
        元の順序を保った構成です。各姿勢の最初と最後の構成は必ず残ります。

    Raises
    ------
    IKError
        max_per_pose が 1 未満の場合に発生します。
    """
    if max_per_pose < 1:
        raise IKError(f"max_per_pose must be at least 1, got {max_per_pose}")
    groups: dict[int, list[tuple[int, JointConfig]]] = {}
    for record in records:
        groups.setdefault(record[0], []).append(record)
    thinned: list[tuple[int, JointConfig]] = []
    for group in groups.values():
        if len(group) <= max_per_pose:
            thinned.extend(group)
            continue
        picks = np.unique(np.rint(np.linspace(0, len(group) - 1, max_per_pose)).astype(int))
        thinned.extend(group[i] for i in picks)
    logger.debug(f"Thinned {len(records)} configurations to {len(thinned)} (at most {max_per_pose} per pose)")
    return thinned
