"""合成シーンと実験レポートの型を定義するモジュールです。"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..exceptions import DimensionMismatchError, SettingsError
from .calibration import CalibrationResult
from .kinematics import DHChain, FloatArray, RigidTransform
from .metrics import AccuracySummary


@dataclass(frozen=True, eq=False)
class SceneConfig:
    """
    模擬実機とセンサーからなる合成シーンです。

    Parameters
    ----------
    chain_nominal : DHChain
        校正前に信じられているロボットモデルです。
    true_offsets_deg : tuple[float, ...]
        模擬実機のゼロオフセット (deg) です。
    true_sensor_pose : RigidTransform
        ロボット基準座標系 R で表したセンサー座標系 N の真の姿勢です。
    marker : str
        センサーが追跡するツール点の名前です。
    sensor_noise_sigma : float
        計測雑音の標準偏差 (mm) です。
    registration_noise_sigma : float
        位置合わせに使う 3 点に加える追加雑音の標準偏差 (mm) です。
    seed : int
        雑音の乱数シードです。
    label : str
        レポートに使うシーンの名前です。

    Raises
    ------
    SettingsError
        雑音が負の場合やマーカーが未定義の場合に発生します。
    DimensionMismatchError
        true_offsets_deg の長さが関節数と一致しない場合に発生します。
    """

    chain_nominal: DHChain
    true_offsets_deg: tuple[float, ...]
    true_sensor_pose: RigidTransform
    marker: str
    sensor_noise_sigma: float
    registration_noise_sigma: float = 0.0
    seed: int = 0
    label: str = "scene"

    def __post_init__(self) -> None:
        offsets = tuple(float(v) for v in self.true_offsets_deg)
        if len(offsets) != self.chain_nominal.k:
            raise DimensionMismatchError("true_offsets_deg", self.chain_nominal.k, len(offsets))
        if not all(math.isfinite(v) for v in offsets):
            raise SettingsError("true_offsets_deg must be finite")
        if not (self.sensor_noise_sigma >= 0.0 and self.registration_noise_sigma >= 0.0):
            raise SettingsError(
                f"Noise sigmas must be non-negative (sensor {self.sensor_noise_sigma}, "
                f"registration {self.registration_noise_sigma})"
            )
        if self.marker not in self.chain_nominal.tool_points:
            raise SettingsError(f"Marker '{self.marker}' is not a tool point of chain '{self.chain_nominal.name}'")
        object.__setattr__(self, "true_offsets_deg", offsets)

    @property
    def true_offsets_rad(self) -> FloatArray:
        return np.radians(np.array(self.true_offsets_deg))

    @property
    def true_chain(self) -> DHChain:
        """模擬実機のチェーン (名目モデルに真のゼロオフセットを入れたもの) です。"""
        return self.chain_nominal.with_offsets(self.true_offsets_rad)

    @property
    def robot_to_sensor(self) -> RigidTransform:
        """R の座標を N に写す真の変換です。"""
        return self.true_sensor_pose.inverse()


@dataclass(frozen=True)
class OffsetComparison:
    """
    2 つのセンサーで推定したゼロオフセットの比較です。

    Attributes
    ----------
    name : str
        パラメーター名です。
    mean_a, std_a, mean_b, std_b : float
        各センサーの推定値と標準偏差 (deg) です。
    difference : float
        推定値の差 (deg) です。
    combined_std : float
        √(std_a² + std_b²) です。
    agrees : bool
        |差| が合成標準偏差の 3 倍以内かどうかです。
    """

    name: str
    mean_a: float
    std_a: float
    mean_b: float
    std_b: float
    difference: float
    combined_std: float
    agrees: bool


@dataclass
class ExperimentReport:
    """
    実験全体の結果です。

    Attributes
    ----------
    scene_label : str
        シーンの名前です。
    profile : str
        MCMC のプロファイル名です。
    seeds : dict[str, int]
        入力として使ったシードです。
    counts : dict[str, int]
        姿勢数と構成数です。
    calibration : CalibrationResult
        校正結果です。
    metrics_before, metrics_after : dict[str, dict[str, AccuracySummary]]
        データセットごとの校正前後の指標です。
    theoretical : dict[str, AccuracySummary]
        "構成集合/基準/種類" をキーとする理論精度です。
    offsets_only_share : dict[str, float]
        理論精度に占めるゼロオフセット由来の割合です。
    injected_offsets_deg : FloatArray
        注入したゼロオフセットです。
    gauge_aligned_offsets_deg, gauge_aligned_std_deg : FloatArray
        ゲージを揃えた推定値と標準偏差です。
    recovery_errors_deg : FloatArray
        |推定値 − 注入値| です。
    """

    scene_label: str
    profile: str
    seeds: dict[str, int]
    counts: dict[str, int]
    calibration: CalibrationResult
    metrics_before: dict[str, dict[str, AccuracySummary]]
    metrics_after: dict[str, dict[str, AccuracySummary]]
    theoretical: dict[str, AccuracySummary]
    offsets_only_share: dict[str, float]
    injected_offsets_deg: FloatArray
    gauge_aligned_offsets_deg: FloatArray
    gauge_aligned_std_deg: FloatArray
    registration_triple: tuple[int, int, int]
    ik_diagnostics: dict[str, int] = field(default_factory=dict)
    sensor_comparison: list[OffsetComparison] = field(default_factory=list)
    comparison_label: str = ""

    @property
    def recovery_errors_deg(self) -> FloatArray:
        return np.abs(self.gauge_aligned_offsets_deg - self.injected_offsets_deg)

    def as_dict(self) -> dict[str, Any]:
        """JSON に書き出せる辞書を返します。"""
        result = self.calibration
        return {
            "scene": self.scene_label,
            "profile": self.profile,
            "seeds": dict(self.seeds),
            "counts": dict(self.counts),
            "registration_triple": list(self.registration_triple),
            "ik_diagnostics": dict(self.ik_diagnostics),
            "calibration": {
                "parameters": {
                    name: {"mean": float(m), "std": float(s)}
                    for name, m, s in zip(result.parameter_names, result.mean_vector, result.std, strict=True)
                },
                "acceptance_rate": result.acceptance_rate,
                "burn_in": result.burn_in,
                "fixed_parameters": list(result.fixed_parameters),
            },
            "recovery": {
                "injected_deg": self.injected_offsets_deg.tolist(),
                "gauge_aligned_deg": self.gauge_aligned_offsets_deg.tolist(),
                "gauge_aligned_std_deg": self.gauge_aligned_std_deg.tolist(),
                "errors_deg": self.recovery_errors_deg.tolist(),
            },
            "metrics_before": {
                dataset: {kind: s.as_dict() for kind, s in summaries.items()}
                for dataset, summaries in self.metrics_before.items()
            },
            "metrics_after": {
                dataset: {kind: s.as_dict() for kind, s in summaries.items()}
                for dataset, summaries in self.metrics_after.items()
            },
            "theoretical": {key: s.as_dict() for key, s in self.theoretical.items()},
            "offsets_only_share": dict(self.offsets_only_share),
            "compared_with": self.comparison_label,
            "sensor_comparison": [vars(c) for c in self.sensor_comparison],
        }
