"""候補姿勢の生成設定と候補姿勢の型を定義するモジュールです。"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import ik_config, sampler_defaults
from ..exceptions import SettingsError
from .kinematics import FloatArray, Pose


@dataclass(frozen=True)
class SamplerConfig:
    """
    LHS による候補姿勢生成の設定です。

    Parameters
    ----------
    n_poses : int
        生成する候補姿勢の数です。
    r_range : tuple[float, float]
        XY 平面内の半径の範囲 (mm) です。
    z_range : tuple[float, float]
        高さの範囲 (mm) です。
    theta_z_base_range : tuple[float, float]
        基準 Z 軸まわりの方位角の範囲 (rad) です。
    theta_z_tool_range : tuple[float, float]
        ツール Z 軸まわりのロール角の範囲 (rad) です。
    sensor_origin : tuple[float, float, float]
        ロボット基準座標系で表したセンサー原点 (mm) です。
    seed : int
        乱数シードです。
    n_keep : int
        残す実行可能姿勢の数です。
    arm_angle_count : int
        逆運動学で使うアーム角の数です。
    max_configs_per_pose : int
        1 つの姿勢から残す関節構成の最大数です。分岐とアーム角の並びから等間隔に選びます。

    Raises
    ------
    SettingsError
        範囲の下限が上限以上の場合、または数が 1 未満の場合に発生します。
    """

    n_poses: int = sampler_defaults.N_POSES
    r_range: tuple[float, float] = sampler_defaults.R_RANGE_MM
    z_range: tuple[float, float] = sampler_defaults.Z_RANGE_MM
    theta_z_base_range: tuple[float, float] = sampler_defaults.THETA_Z_BASE_RANGE_RAD
    theta_z_tool_range: tuple[float, float] = sampler_defaults.THETA_Z_TOOL_RANGE_RAD
    sensor_origin: tuple[float, float, float] = sampler_defaults.SENSOR_ORIGIN_MM
    seed: int = sampler_defaults.OPTIMIZATION_SEED
    n_keep: int = sampler_defaults.N_KEEP_OPTIMIZATION
    arm_angle_count: int = ik_config.DEFAULT_ARM_ANGLE_COUNT
    max_configs_per_pose: int = sampler_defaults.MAX_CONFIGS_PER_POSE

    def __post_init__(self) -> None:
        if self.n_poses < 1:
            raise SettingsError(f"n_poses must be at least 1, got {self.n_poses}")
        if self.n_keep < 1:
            raise SettingsError(f"n_keep must be at least 1, got {self.n_keep}")
        if self.arm_angle_count < 1:
            raise SettingsError(f"arm_angle_count must be at least 1, got {self.arm_angle_count}")
        if self.max_configs_per_pose < 1:
            raise SettingsError(f"max_configs_per_pose must be at least 1, got {self.max_configs_per_pose}")
        for name in ("r_range", "z_range", "theta_z_base_range", "theta_z_tool_range"):
            low, high = getattr(self, name)
            if not (math.isfinite(low) and math.isfinite(high) and low < high):
                raise SettingsError(f"{name} must satisfy min < max, got [{low}, {high}]")
        if len(self.sensor_origin) != 3:
            raise SettingsError("sensor_origin must have three coordinates")

    @property
    def bounds(self) -> FloatArray:
        """LHS の 4 次元 (ᴿθ_z, r, ᴿz_d, ᵀθ_z) の [下限, 上限] を返します。"""
        return np.array([self.theta_z_base_range, self.r_range, self.z_range, self.theta_z_tool_range])


@dataclass(frozen=True, eq=False)
class CandidatePose:
    """
    センサーを向くように構成された候補姿勢です。

    Parameters
    ----------
    pose : Pose
        フランジの姿勢です。回転の第 3 列はセンサー原点を向きます。
    lhs_coords : tuple[float, float, float, float]
        姿勢を生成した (ᴿθ_z, r, ᴿz_d, ᵀθ_z) です。
    """

    pose: Pose
    lhs_coords: tuple[float, float, float, float]


@dataclass
class PoseSet:
    """
    フィルター済みの候補姿勢と生成時の集計です。

    Attributes
    ----------
    candidates : list[CandidatePose]
        残した姿勢です。
    n_generated : int
        生成した姿勢の数です。
    n_degenerate : int
        再サンプリングしても退化したまま捨てた行の数です。
    n_resampled : int
        再サンプリングした回数の合計です。
    n_infeasible : int
        到達不能などで捨てた姿勢の数です。
    """

    candidates: list[CandidatePose] = field(default_factory=list)
    n_generated: int = 0
    n_degenerate: int = 0
    n_resampled: int = 0
    n_infeasible: int = 0

    @property
    def poses(self) -> list[Pose]:
        return [candidate.pose for candidate in self.candidates]
