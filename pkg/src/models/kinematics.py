"""運動学のドメイン型 (D-H 関節、チェーン、剛体変換、姿勢) を定義するモジュールです。

すべての型は生成後に不変で、内部の配列は書き込み禁止に設定されます。
そのため、任意のスレッドから同時に参照しても安全です。
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import kinematics_config
from ..exceptions import (
    DimensionMismatchError,
    InvalidChainError,
    JointLimitError,
    RotationError,
    UnknownToolPointError,
)

FloatArray: TypeAlias = NDArray[np.float64]
# 関節構成は長さ k の角度ベクトル (rad) です。可動範囲は使用箇所で検査します。
JointConfig: TypeAlias = FloatArray


def _frozen_array(values: ArrayLike, shape: tuple[int, ...] | None = None, what: str = "array") -> FloatArray:
    """値を float64 の書き込み禁止配列に変換します。"""
    array = np.array(values, dtype=np.float64)
    if shape is not None and array.shape != shape:
        raise DimensionMismatchError(what, int(np.prod(shape)), int(array.size))
    array.setflags(write=False)
    return array


def _in_half_open_pi(angle: float) -> bool:
    return -math.pi < angle <= math.pi


def rotation_error(matrix: ArrayLike) -> tuple[float, float]:
    """
    回転行列の正規直交性からのずれを返します。

    Parameters
    ----------
    matrix : ArrayLike
        3×3 行列です。

    Returns
    -------
    tuple[float, float]
        RᵀR − I の最大絶対値と |det R − 1| です。
    """
    m = np.asarray(matrix, dtype=np.float64)
    orthogonality = float(np.max(np.abs(m.T @ m - np.eye(3))))
    determinant = abs(float(np.linalg.det(m)) - 1.0)
    return orthogonality, determinant


def require_rotation(matrix: ArrayLike, tolerance: float | None = None) -> FloatArray:
    """
    行列が回転行列であることを確認し、float64 配列として返します。

    Parameters
    ----------
    matrix : ArrayLike
        3×3 行列です。
    tolerance : float | None
        許容誤差です。None の場合は設定値を使用します。

    Returns
    -------
    FloatArray
        検査済みの回転行列です。

    Raises
    ------
    RotationError
        形状が 3×3 でない場合、または正規直交でない場合に発生します。
    """
    tol = kinematics_config.ROTATION_TOLERANCE if tolerance is None else tolerance
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (3, 3):
        raise RotationError(f"Rotation must be 3x3, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise RotationError("Rotation contains non-finite entries")
    orthogonality, determinant = rotation_error(m)
    if orthogonality > tol or determinant > tol:
        raise RotationError(
            f"Matrix is not a proper rotation (|RtR-I|={orthogonality:.3e}, |det-1|={determinant:.3e})"
        )
    return m


@dataclass(frozen=True)
class DHJoint:
    """
    標準 (distal) D-H 規約の 1 関節分のパラメーターです。

    Parameters
    ----------
    a : float
        リンク長 (mm) です。
    alpha : float
        リンクのねじれ角 (rad) です。
    d : float
        リンクのオフセット (mm) です。
    theta_home : float
        D-H 規約上の一定の角度オフセット (rad) です。
    joint_kind : str
        関節の種類です。回転関節 ("revolute") のみ対応しています。
    """

    a: float
    alpha: float
    d: float
    theta_home: float = 0.0
    joint_kind: str = "revolute"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.d)):
            raise InvalidChainError(f"D-H lengths must be finite (a={self.a}, d={self.d})")
        if not (_in_half_open_pi(self.alpha) and _in_half_open_pi(self.theta_home)):
            raise InvalidChainError(
                f"D-H angles must lie in (-pi, pi] (alpha={self.alpha}, theta_home={self.theta_home})"
            )
        if self.joint_kind != "revolute":
            raise InvalidChainError(f"Only revolute joints are supported, got '{self.joint_kind}'")


@dataclass(frozen=True, eq=False)
class DHChain:
    """
    順序付きの D-H 関節表とゼロオフセット、可動範囲、ツール点からなるロボットモデルです。

    Parameters
    ----------
    joints : tuple[DHJoint, ...]
        根元から先端までの関節です。
    joint_limits : ArrayLike
        関節ごとの [min, max] (rad) で、形状は (k, 2) です。
    tool_points : Mapping[str, ArrayLike]
        フランジ座標系で表した名前付きの 3 次元点 (mm) です。
    zero_offsets : ArrayLike | None
        関節ごとのゼロオフセット Θ₂ (rad) です。None の場合はすべて 0 です。
    name : str
        チェーンの名前です。

    Notes
    -----
    関節 i の角度には qᵢ + δθᵢ + theta_homeᵢ が使われます。回転関節ではすべて
    加算なので、δθ を D-H のホームオフセットの前後どちらに加えても結果は同じです。
    """

    joints: tuple[DHJoint, ...]
    joint_limits: FloatArray
    tool_points: Mapping[str, FloatArray]
    zero_offsets: FloatArray | None = None
    name: str = "chain"
    _alpha: FloatArray = field(init=False, repr=False)
    _a: FloatArray = field(init=False, repr=False)
    _d: FloatArray = field(init=False, repr=False)
    _home: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        joints = tuple(self.joints)
        k = len(joints)
        if k == 0:
            raise InvalidChainError("A chain needs at least one joint")
        offsets = np.zeros(k) if self.zero_offsets is None else self.zero_offsets
        offsets = _frozen_array(offsets, what="zero_offsets")
        if offsets.shape != (k,):
            raise DimensionMismatchError("zero_offsets", k, int(offsets.size))
        if not np.all(np.isfinite(offsets)):
            raise InvalidChainError("zero_offsets must be finite")
        limits = _frozen_array(self.joint_limits, what="joint_limits")
        if limits.shape != (k, 2):
            raise DimensionMismatchError("joint_limits", 2 * k, int(limits.size))
        if not np.all(limits[:, 0] < limits[:, 1]):
            raise InvalidChainError("Every joint limit must satisfy min < max")
        points: dict[str, FloatArray] = {}
        for point_name, point in self.tool_points.items():
            vector = _frozen_array(point, shape=(3,), what=f"tool point '{point_name}'")
            if not np.all(np.isfinite(vector)):
                raise InvalidChainError(f"Tool point '{point_name}' has non-finite coordinates")
            points[str(point_name)] = vector

        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "zero_offsets", offsets)
        object.__setattr__(self, "joint_limits", limits)
        object.__setattr__(self, "tool_points", dict(points))
        object.__setattr__(self, "_alpha", _frozen_array([j.alpha for j in joints]))
        object.__setattr__(self, "_a", _frozen_array([j.a for j in joints]))
        object.__setattr__(self, "_d", _frozen_array([j.d for j in joints]))
        object.__setattr__(self, "_home", _frozen_array([j.theta_home for j in joints]))

    @property
    def k(self) -> int:
        """関節数を返します。"""
        return len(self.joints)

    @property
    def offsets(self) -> FloatArray:
        """ゼロオフセット (rad) を返します。"""
        assert self.zero_offsets is not None
        return self.zero_offsets

    @property
    def alpha_vector(self) -> FloatArray:
        return self._alpha

    @property
    def a_vector(self) -> FloatArray:
        return self._a

    @property
    def d_vector(self) -> FloatArray:
        return self._d

    @property
    def home_vector(self) -> FloatArray:
        return self._home

    def with_offsets(self, zero_offsets: ArrayLike) -> DHChain:
        """
        ゼロオフセットだけを置き換えたチェーンを返します。

        Parameters
        ----------
        zero_offsets : ArrayLike
            新しいゼロオフセット (rad) です。

        Returns
        -------
        DHChain
            新しいチェーンです。
        """
        return dataclasses.replace(self, zero_offsets=np.asarray(zero_offsets, dtype=np.float64))

    def with_limits(self, joint_limits: ArrayLike) -> DHChain:
        """可動範囲だけを置き換えたチェーンを返します。"""
        return dataclasses.replace(self, joint_limits=np.asarray(joint_limits, dtype=np.float64))

    def tool_point_vector(self, point_name: str) -> FloatArray:
        """
        名前付きツール点の座標を返します。

        Raises
        ------
        UnknownToolPointError
            ツール点が定義されていない場合に発生します。
        """
        try:
            return self.tool_points[point_name]
        except KeyError as e:
            raise UnknownToolPointError(point_name, list(self.tool_points)) from e

    def validate_config(self, q: ArrayLike, check_limits: bool = True) -> JointConfig:
        """
        関節構成の長さと可動範囲を検査します。

        Parameters
        ----------
        q : ArrayLike
            関節構成 (rad) です。
        check_limits : bool
            可動範囲も検査するかどうかです。

        Returns
        -------
        JointConfig
            float64 配列に変換された関節構成です。

        Raises
        ------
        DimensionMismatchError
            長さが関節数と一致しない場合に発生します。
        JointLimitError
            可動範囲外の関節がある場合に発生します。
        """
        angles = np.asarray(q, dtype=np.float64)
        if angles.ndim != 1 or angles.shape[0] != self.k:
            raise DimensionMismatchError("joint configuration", self.k, int(angles.size))
        if check_limits:
            lower, upper = self.joint_limits[:, 0], self.joint_limits[:, 1]
            outside = np.flatnonzero((angles < lower) | (angles > upper))
            if outside.size:
                i = int(outside[0])
                raise JointLimitError(i, float(angles[i]), float(lower[i]), float(upper[i]))
        return angles

    def within_limits(self, q: ArrayLike) -> bool:
        """関節構成が可動範囲内かどうかを返します。"""
        angles = np.asarray(q, dtype=np.float64)
        return bool(np.all((angles >= self.joint_limits[:, 0]) & (angles <= self.joint_limits[:, 1])))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """
    回転と並進からなる剛体変換です。

    Parameters
    ----------
    rotation : ArrayLike
        3×3 の回転行列です。
    translation : ArrayLike
        並進ベクトル (mm) です。

    Raises
    ------
    RotationError
        回転行列が正規直交でない場合に発生します。
    """

    rotation: FloatArray
    translation: FloatArray

    def __post_init__(self) -> None:
        rotation = require_rotation(self.rotation)
        object.__setattr__(self, "rotation", _frozen_array(rotation))
        object.__setattr__(self, "translation", _frozen_array(self.translation, shape=(3,), what="translation"))

    @classmethod
    def identity(cls) -> RigidTransform:
        """恒等変換を返します。"""
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> RigidTransform:
        """4×4 の同次変換行列から生成します。"""
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (4, 4):
            raise DimensionMismatchError("homogeneous matrix", 16, int(m.size))
        return cls(m[:3, :3], m[:3, 3])

    def as_matrix(self) -> FloatArray:
        """4×4 の同次変換行列を返します。"""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def inverse(self) -> RigidTransform:
        """逆変換を返します。"""
        rotation_t = self.rotation.T
        return type(self)(rotation_t, -rotation_t @ self.translation)

    def compose(self, other: RigidTransform) -> RigidTransform:
        """self · other を返します (other を先に適用します)。"""
        return type(self)(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def apply(self, points: ArrayLike) -> FloatArray:
        """
        点 (3,) または点群 (n, 3) を変換します。

        Parameters
        ----------
        points : ArrayLike
            変換する点です。

        Returns
        -------
        FloatArray
            変換後の点です。
        """
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation


@dataclass(frozen=True, eq=False)
class Pose(RigidTransform):
    """
    ロボット基準座標系 R で表したフランジやツールの姿勢です。

    Notes
    -----
    回転部分は ZYX オイラー角 (γ, θ, φ) と相互変換できます。
    変換は ``services.kinematics`` の関数を使用してください。
    """
