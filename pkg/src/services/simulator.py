"""合成シーンで計測を模擬し、データセットと初期位置合わせを作るモジュールです。

乱数はすべてカウンター方式で、(シード, 系列名, 通し番号) から決まります。
そのため MCMC のステップ数などを変えてもシーンの雑音は変わりません。
"""

from __future__ import annotations

import math
import zlib
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from ..common import LoggingMixin
from ..exceptions import EmptyDatasetError
from ..models.calibration import CalibrationDataset, CalibrationResult, ParameterVector, RegistrationCorrection
from ..models.kinematics import DHChain, FloatArray, JointConfig, RigidTransform
from ..models.scene import OffsetComparison, SceneConfig
from .kinematics import rotation_to_euler_zyx, tool_point, tool_points_batch
from .registration import correction_transform, register_three_points, select_registration_triple

MEASUREMENT_STREAM = "measurement"
REGISTRATION_STREAM = "registration"


def noise_generator(seed: int, stream: str, counter: int) -> np.random.Generator:
    """(シード, 系列名, 通し番号) だけで決まる乱数生成器を返します。"""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(zlib.crc32(stream.encode("utf-8")), counter))
    return np.random.default_rng(sequence)


def simulate_measurement(
    scene: SceneConfig, q: ArrayLike, counter: int = 0, stream: str = MEASUREMENT_STREAM
) -> FloatArray:
    """
    模擬実機のマーカー位置をセンサーで計測した値を返します。

    Parameters
    ----------
    scene : SceneConfig
        合成シーンです。
    q : ArrayLike
        関節構成 (rad) です。
    counter : int
        雑音の通し番号です。
    stream : str
        雑音の系列名です。

    Returns
    -------
    FloatArray
        参照座標系 N での計測点 (mm) です。

    Raises
    ------
    JointLimitError
        可動範囲外の関節がある場合に発生します。
    """
    point = tool_point(scene.true_chain, q, scene.marker)
    measured = scene.robot_to_sensor.apply(point)
    if scene.sensor_noise_sigma > 0.0:
        measured = measured + noise_generator(scene.seed, stream, counter).normal(0.0, scene.sensor_noise_sigma, 3)
    return measured


class SceneSimulator(LoggingMixin):
    """
    合成シーンからデータセットと初期位置合わせを作るクラスです。

    Parameters
    ----------
    scene : SceneConfig
        合成シーンです。
    """

    def __init__(self, scene: SceneConfig) -> None:
        super().__init__()
        self._scene = scene

    @property
    def scene(self) -> SceneConfig:
        return self._scene

    def build_dataset(
        self, configs: Sequence[tuple[int, JointConfig]], stream: str = MEASUREMENT_STREAM
    ) -> CalibrationDataset:
        """
        構成ごとに 1 レコードのデータセットを作ります。

        Parameters
        ----------
        configs : Sequence[tuple[int, JointConfig]]
            (姿勢番号, 関節構成) のリストです。
        stream : str
            雑音の系列名です。最適化用と検証用で別の名前を使います。

        Returns
        -------
        CalibrationDataset
            計測データセットです。

        Raises
        ------
        EmptyDatasetError
            構成が空の場合に発生します。
        """
        if not configs:
            raise EmptyDatasetError("Cannot build a dataset from an empty configuration list")
        scene = self._scene
        chain = scene.true_chain
        q = np.array([chain.validate_config(config) for _, config in configs])
        points = scene.robot_to_sensor.apply(tool_points_batch(chain, q, scene.marker))
        if scene.sensor_noise_sigma > 0.0:
            noise = np.array(
                [
                    noise_generator(scene.seed, stream, counter).normal(0.0, scene.sensor_noise_sigma, 3)
                    for counter in range(len(configs))
                ]
            )
            points = points + noise
        self.log_info(f"Simulated {len(configs)} measurements on stream '{stream}' (scene {scene.label})")
        return CalibrationDataset(
            configs=q,
            points=points,
            pose_indices=np.array([index for index, _ in configs]),
            marker_name=scene.marker,
            chain_name=scene.chain_nominal.name,
        )

    def initial_registration(self, dataset: CalibrationDataset) -> tuple[RigidTransform, tuple[int, int, int]]:
        """
        データセットから 3 点を選び、初期変換 ᴺᵣT を求めます。

        Returns
        -------
        tuple[RigidTransform, tuple[int, int, int]]
            初期変換と選んだレコードの番号です。

        Notes
        -----
        N 側の 3 点には registration_noise_sigma の雑音を加え、
        R 側の 3 点は名目モデルのツール点を使います。
        """
        scene = self._scene
        triple = select_registration_triple(dataset.points)
        rows = list(triple)
        p_n = np.array(dataset.points[rows])
        if scene.registration_noise_sigma > 0.0:
            rng = noise_generator(scene.seed, REGISTRATION_STREAM, 0)
            p_n = p_n + rng.normal(0.0, scene.registration_noise_sigma, size=p_n.shape)
        p_r = tool_points_batch(scene.chain_nominal, dataset.configs[rows], dataset.marker_name)
        self.log_debug(f"Registration triple {triple}")
        return register_three_points(p_n, p_r), triple


def build_dataset(
    scene: SceneConfig, configs: Sequence[tuple[int, JointConfig]], stream: str = MEASUREMENT_STREAM
) -> CalibrationDataset:
    """SceneSimulator.build_dataset の関数版です。"""
    return SceneSimulator(scene).build_dataset(configs, stream)


def ground_truth_parameters(scene: SceneConfig, initial_transform: RigidTransform, sigma: float) -> ParameterVector:
    """
    シーンの真値に対応するパラメーターを返します。

    Notes
    -----
    T*(Θ₁)·ᴺᵣT が真の変換と一致するように Θ₁ を決めます。
    """
    correction = scene.robot_to_sensor.compose(initial_transform.inverse())
    alpha, beta, gamma = rotation_to_euler_zyx(correction.rotation)
    x, y, z = (float(v) for v in correction.translation)
    return ParameterVector(RegistrationCorrection(x, y, z, alpha, beta, gamma), scene.true_offsets_rad, sigma)


def _yaw(rotation: FloatArray) -> float:
    return math.atan2(rotation[1, 0], rotation[0, 0])


def gauge_aligned_offsets(
    result: CalibrationResult, initial_transform: RigidTransform, scene: SceneConfig
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """
    ベース関節のオフセットを位置合わせの Z 軸まわりの回転と揃えたサンプルを返します。

    Parameters
    ----------
    result : CalibrationResult
        校正結果です。
    initial_transform : RigidTransform
        初期変換 ᴺᵣT です。
    scene : SceneConfig
        真の変換を持つシーンです。

    Returns
    -------
    tuple[FloatArray, FloatArray, FloatArray]
        揃えたオフセットの平均 (deg)、標準偏差 (deg)、サンプル (m, k) (deg) です。

    Notes
    -----
    ベース関節のオフセット δθ₁ と位置合わせの基準 Z 軸まわりの回転は観測上区別できません。
    各サンプルで D = T_true⁻¹·T*(Θ₁)·ᴺᵣT のヨー角 atan2(D10, D00) を δθ₁ に加えます。
    """
    true_inverse = scene.robot_to_sensor.inverse()
    samples = np.array(result.post_burn_in_samples[:, 6:-1], dtype=np.float64)
    for row, correction in enumerate(result.correction_samples()):
        fitted = correction_transform(correction).compose(initial_transform)
        samples[row, 0] += math.degrees(_yaw(true_inverse.compose(fitted).rotation))
    std = samples.std(axis=0, ddof=1) if samples.shape[0] > 1 else np.zeros(samples.shape[1])
    return samples.mean(axis=0), std, samples


def compare_sensors(
    names: Sequence[str],
    mean_a: ArrayLike,
    std_a: ArrayLike,
    mean_b: ArrayLike,
    std_b: ArrayLike,
) -> list[OffsetComparison]:
    """
    2 つのセンサーで推定したゼロオフセットを比較します。

    Parameters
    ----------
    names : Sequence[str]
        パラメーター名です。
    mean_a, std_a, mean_b, std_b : ArrayLike
        各センサーの推定値と標準偏差 (deg) です。

    Returns
    -------
    list[OffsetComparison]
        パラメーターごとの比較です。差が合成標準偏差の 3 倍以内なら一致とみなします。
    """
    comparisons = []
    for name, ma, sa, mb, sb in zip(
        names,
        np.asarray(mean_a, dtype=np.float64),
        np.asarray(std_a, dtype=np.float64),
        np.asarray(mean_b, dtype=np.float64),
        np.asarray(std_b, dtype=np.float64),
        strict=True,
    ):
        combined = math.hypot(float(sa), float(sb))
        difference = float(ma - mb)
        comparisons.append(
            OffsetComparison(
                name=str(name),
                mean_a=float(ma),
                std_a=float(sa),
                mean_b=float(mb),
                std_b=float(sb),
                difference=difference,
                combined_std=combined,
                agrees=abs(difference) <= 3.0 * combined,
            )
        )
    return comparisons


def tool_points_for(chain: DHChain, dataset: CalibrationDataset) -> FloatArray:
    """データセットの各構成でのマーカー位置をチェーンのモデルで計算します。"""
    return tool_points_batch(chain, dataset.configs, dataset.marker_name)
