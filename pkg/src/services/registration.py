"""3 点による初期位置合わせと 6 自由度補正 T*(Θ₁) を扱うモジュールです。

初期変換 ᴺᵣT はロボット基準座標系 R の座標を参照センサー座標系 N に写します。
"""

from __future__ import annotations

import itertools

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial import ConvexHull, QhullError

from ..exceptions import CollinearPointsError, DimensionMismatchError, RegistrationError
from ..logger import get_logger
from ..models.calibration import RegistrationCorrection
from ..models.kinematics import FloatArray, RigidTransform
from .kinematics import euler_zyx_to_rotation

logger = get_logger(__name__)

COLLINEAR_AREA_TOLERANCE_MM2 = 1e-6


def triangle_area(p1: ArrayLike, p2: ArrayLike, p3: ArrayLike) -> float:
    """3 点が作る三角形の面積 (mm²) を返します。"""
    a = np.asarray(p2, dtype=np.float64) - np.asarray(p1, dtype=np.float64)
    b = np.asarray(p3, dtype=np.float64) - np.asarray(p1, dtype=np.float64)
    return 0.5 * float(np.linalg.norm(np.cross(a, b)))


def frame_from_three_points(points: ArrayLike, frame: str = "") -> RigidTransform:
    """
    3 点から正規直交な座標系を作ります。

    Parameters
    ----------
    points : ArrayLike
        形状 (3, 3) の点です。
    frame : str
        エラーメッセージに使う座標系のラベルです。

    Returns
    -------
    RigidTransform
        原点を第 1 点、x 軸を第 2 点 − 第 1 点、z 軸を平面の法線とする座標系です。

    Raises
    ------
    CollinearPointsError
        3 点が作る三角形の面積が 1e-6 mm² 以下の場合に発生します。
    """
    p = np.asarray(points, dtype=np.float64)
    if p.shape != (3, 3):
        raise DimensionMismatchError(f"registration points in frame {frame}", 3, int(p.shape[0]) if p.ndim else 0)
    area = triangle_area(p[0], p[1], p[2])
    if area <= COLLINEAR_AREA_TOLERANCE_MM2:
        raise CollinearPointsError(area, frame)
    x_axis = p[1] - p[0]
    x_axis /= np.linalg.norm(x_axis)
    z_axis = np.cross(p[1] - p[0], p[2] - p[0])
    z_axis /= np.linalg.norm(z_axis)
    y_axis = np.cross(z_axis, x_axis)
    return RigidTransform(np.column_stack([x_axis, y_axis, z_axis]), p[0])


def register_three_points(p_n: ArrayLike, p_r: ArrayLike) -> RigidTransform:
    """
    対応する 3 点から ᴺᵣT を求めます。

    Parameters
    ----------
    p_n : ArrayLike
        参照座標系 N での 3 点です。
    p_r : ArrayLike
        ロボット基準座標系 R での同じ 3 点です。

    Returns
    -------
    RigidTransform
        R の座標を N に写す変換 F_N·F_R⁻¹ です。

    Raises
    ------
    DimensionMismatchError
        点の数が 3 でない場合に発生します。
    CollinearPointsError
        どちらかの 3 点が同一直線上にある場合に発生します。
    """
    n_points = np.asarray(p_n, dtype=np.float64)
    r_points = np.asarray(p_r, dtype=np.float64)
    if n_points.shape[0] != 3 or r_points.shape[0] != 3:
        raise DimensionMismatchError("registration point pairs", 3, int(min(n_points.shape[0], r_points.shape[0])))
    frame_n = frame_from_three_points(n_points, "N")
    frame_r = frame_from_three_points(r_points, "R")
    return frame_n.compose(frame_r.inverse())


def correction_transform(theta1: RegistrationCorrection) -> RigidTransform:
    """T*(Θ₁) を返します。回転は Rz(α)·Ry(β)·Rx(γ) です。"""
    rotation = euler_zyx_to_rotation(theta1.alpha, theta1.beta, theta1.gamma)
    return RigidTransform(rotation, np.array([theta1.x, theta1.y, theta1.z]))


def corrected_transform(initial: RigidTransform, theta1: RegistrationCorrection) -> RigidTransform:
    """
    補正済みの変換 T*(Θ₁)·ᴺᵣT を返します。

    Parameters
    ----------
    initial : RigidTransform
        初期変換 ᴺᵣT です。
    theta1 : RegistrationCorrection
        補正パラメーターです。

    Returns
    -------
    RigidTransform
        補正済みの変換です。
    """
    return correction_transform(theta1).compose(initial)


def map_robot_point(initial: RigidTransform, theta1: RegistrationCorrection, p_robot: ArrayLike) -> FloatArray:
    """ロボット基準座標系の点 (または点群) を補正済みの変換で N に写します。"""
    return corrected_transform(initial, theta1).apply(p_robot)


def _max_area_triple(points: FloatArray, candidates: FloatArray) -> tuple[int, int, int]:
    best_area = -1.0
    best: tuple[int, int, int] = (0, 1, 2)
    for i, j, k in itertools.combinations(candidates.tolist(), 3):
        area = triangle_area(points[i], points[j], points[k])
        if area > best_area:
            best_area, best = area, (int(i), int(j), int(k))
    return best


def select_registration_triple(points: ArrayLike) -> tuple[int, int, int]:
    """
    三角形の面積が最大になる 3 点の番号を返します。

    Parameters
    ----------
    points : ArrayLike
        形状 (n, 3) の点です。

    Returns
    -------
    tuple[int, int, int]
        昇順の番号です。同じ面積の組は辞書順で最初のものを選びます。

    Raises
    ------
    RegistrationError
        点が 3 つ未満の場合に発生します。

    Notes
    -----
    面積最大の三角形の頂点は凸包の頂点に含まれるので、凸包の頂点だけを調べます。
    凸包が作れない (点が平面上にあるなど) 場合はすべての点を調べます。
    """
    p = np.asarray(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 3:
        raise RegistrationError("At least three points are required to select a registration triple")
    try:
        candidates = np.sort(ConvexHull(p).vertices)
    except (QhullError, ValueError):
        logger.debug("Convex hull unavailable, searching all point triples")
        candidates = np.arange(p.shape[0])
    return _max_area_triple(p, candidates)
